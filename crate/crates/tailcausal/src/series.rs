use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("series '{name}' needs at least 2 observations, got {len}")]
    TooShort { name: String, len: usize },
    #[error("series '{name}' has a non-finite value at index {index}")]
    NonFinite { name: String, index: usize },
}

/// A named, finite, equally spaced univariate time series.
///
/// Invariants (enforced at construction): every value is finite and the
/// length is at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    name: String,
    values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self, SeriesError> {
        let name = name.into();
        if values.len() < 2 {
            return Err(SeriesError::TooShort { name, len: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite { name, index });
        }
        Ok(Series { name, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: len >= 2
    }

    /// Same observations under a new name.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Element-wise absolute value, same name.
    pub fn abs(&self) -> Series {
        Series {
            name: self.name.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }
}
