use crate::error::{Error, Result};

/// A hardware design point: array dimensions, datapath bit widths and
/// buffer capacities.
///
/// `height` is the reduction (K) axis: weight tiles are at most `height`
/// rows tall. `width` is the output-feature (N) axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ArrayConfig {
    pub height: u32,
    pub width: u32,
    pub weight_bits: u32,
    pub activation_bits: u32,
    pub accumulator_bits: u32,
    /// Output rows the accumulator array holds per column; bounds the
    /// activation chunk streamed through a resident tile.
    pub accumulator_depth: u32,
    /// Entries per row FIFO. Streaming is stall-free, so this does not
    /// change any counter.
    pub fifo_depth: u32,
}

pub const DEFAULT_WEIGHT_BITS: u32 = 8;
pub const DEFAULT_ACTIVATION_BITS: u32 = 8;
pub const DEFAULT_ACCUMULATOR_BITS: u32 = 32;
pub const DEFAULT_ACCUMULATOR_DEPTH: u32 = 4096;
pub const DEFAULT_FIFO_DEPTH: u32 = 256;

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            height: 256,
            width: 256,
            weight_bits: DEFAULT_WEIGHT_BITS,
            activation_bits: DEFAULT_ACTIVATION_BITS,
            accumulator_bits: DEFAULT_ACCUMULATOR_BITS,
            accumulator_depth: DEFAULT_ACCUMULATOR_DEPTH,
            fifo_depth: DEFAULT_FIFO_DEPTH,
        }
    }
}

fn valid_bits(bits: u32) -> bool {
    matches!(bits, 8 | 16 | 32)
}

impl ArrayConfig {
    /// A `height x width` array with default bit widths and depths.
    pub fn new(height: u32, width: u32) -> Result<Self> {
        let cfg = ArrayConfig {
            height,
            width,
            ..ArrayConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same template, different dimensions.
    pub fn with_dims(&self, height: u32, width: u32) -> Self {
        ArrayConfig {
            height,
            width,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidConfig("height and width must be at least 1"));
        }
        if self.accumulator_depth == 0 {
            return Err(Error::InvalidConfig("accumulator_depth must be at least 1"));
        }
        if self.fifo_depth == 0 {
            return Err(Error::InvalidConfig("fifo_depth must be at least 1"));
        }
        if !valid_bits(self.weight_bits)
            || !valid_bits(self.activation_bits)
            || !valid_bits(self.accumulator_bits)
        {
            return Err(Error::InvalidConfig("bit widths must be 8, 16 or 32"));
        }
        Ok(())
    }

    pub fn pe_count(&self) -> u64 {
        u64::from(self.height) * u64::from(self.width)
    }
}
