use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::datamodel::DataModelSpec;
use crate::error::{Error, Result};

/// Numbers characterizing the market at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub as_of: NaiveDate,
    /// Level metric, decimal rate.
    pub level: f64,
    pub window_start: NaiveDate,
}

impl MarketState {
    pub fn new(as_of: NaiveDate, level: f64, window_start: NaiveDate) -> Result<Self> {
        if !level.is_finite() {
            return Err(Error::config("level", "must be finite"));
        }
        if window_start > as_of {
            return Err(Error::config("window_start", format!("{window_start} is after as_of {as_of}")));
        }
        Ok(MarketState { as_of, level, window_start })
    }
}

/// The empirical distribution of m-day shocks produced by a Data Model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockDistribution {
    pub shocks: Vec<f64>,
    pub holding_days: usize,
    pub model: DataModelSpec,
    pub source_window: (NaiveDate, NaiveDate),
    pub state_observed: MarketState,
    pub state_used: MarketState,
}

impl ShockDistribution {
    pub fn len(&self) -> usize {
        self.shocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shocks.is_empty()
    }

    pub fn model_id(&self) -> String {
        self.model.id()
    }
}
