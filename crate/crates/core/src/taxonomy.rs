//! Five-way classification of a solution space.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bayes::SolutionEstimate;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Single,
    Dominant,
    Multiple,
    Sparse,
    Empty,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Single => "single",
            Category::Dominant => "dominant",
            Category::Multiple => "multiple",
            Category::Sparse => "sparse",
            Category::Empty => "empty",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyThresholds {
    /// Dominant iff the largest lower bound is strictly above this.
    pub dominant_lower: f64,
    /// Sparse iff the largest upper bound is strictly below this.
    pub sparse_upper: f64,
    /// Credible level of the interval estimates.
    pub level: f64,
}

impl Default for TaxonomyThresholds {
    fn default() -> Self {
        Self {
            dominant_lower: 0.5,
            sparse_upper: 0.5,
            level: 0.95,
        }
    }
}

impl TaxonomyThresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dominant_lower", self.dominant_lower),
            ("sparse_upper", self.sparse_upper),
            ("level", self.level),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Classifies from the estimates of the valid solutions only. Tests run in
/// the order Empty, Single, Dominant, Sparse, Multiple.
pub fn classify(
    ns_valid: usize,
    estimates: &[SolutionEstimate],
    thresholds: &TaxonomyThresholds,
) -> Result<Category> {
    thresholds.validate()?;
    if estimates.len() != ns_valid {
        return Err(Error::InvalidParameter(format!(
            "{} estimates for {ns_valid} valid solutions",
            estimates.len()
        )));
    }
    let category = match ns_valid {
        0 => Category::Empty,
        1 => Category::Single,
        _ => {
            let max_lower = estimates.iter().map(|e| e.p_lower).fold(f64::MIN, f64::max);
            let max_upper = estimates.iter().map(|e| e.p_upper).fold(f64::MIN, f64::max);
            if max_lower > thresholds.dominant_lower {
                Category::Dominant
            } else if max_upper < thresholds.sparse_upper {
                Category::Sparse
            } else {
                Category::Multiple
            }
        }
    };
    Ok(category)
}
