use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Where an integer value left its configured bit width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverflowSite {
    /// An activation operand does not fit `activation_bits`.
    Activation,
    /// A weight operand does not fit `weight_bits`.
    Weight,
    /// A partial sum inside the array or in the accumulator array exceeded
    /// `accumulator_bits`.
    Accumulator,
}

impl core::fmt::Display for OverflowSite {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            OverflowSite::Activation => "activation",
            OverflowSite::Weight => "weight",
            OverflowSite::Accumulator => "accumulator",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid layer `{layer}`: {reason}")]
    InvalidLayer { layer: String, reason: &'static str },

    #[error("layer `{layer}` has degenerate output size {out_h}x{out_w}")]
    DegenerateOutput { layer: String, out_h: i64, out_w: i64 },

    #[error("invalid network: {0}")]
    InvalidNetwork(&'static str),

    #[error("layer `{layer}`: {source}")]
    InLayer {
        layer: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid array configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("invalid workload: {0}")]
    InvalidWorkload(&'static str),

    #[error("{operand} has shape {found_rows}x{found_cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        operand: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    #[error("{site} value {value} does not fit in {bits} bits")]
    BitwidthOverflow {
        site: OverflowSite,
        bits: u32,
        value: i128,
    },

    #[error("operand contains a non-finite value")]
    NonFiniteOperand,

    #[error("counter overflow while emulating `{0}`")]
    CounterOverflow(String),

    #[error("empty input")]
    EmptyInput,

    #[error("metric values must be strictly positive")]
    NonPositiveMetric,

    #[error("invalid sweep: {0}")]
    InvalidSweep(&'static str),

    #[error("ratio {height_part}:{width_part} does not split {pe_count} PEs into integer dimensions")]
    NonSquareDecomposition {
        pe_count: u64,
        height_part: u64,
        width_part: u64,
    },

    #[error("model `{model}` has no record for design point {height}x{width}")]
    MissingDesignPoint {
        model: String,
        height: u32,
        width: u32,
    },

    #[error("model `{model}` has more than one record for design point {height}x{width}")]
    DuplicatePoint {
        model: String,
        height: u32,
        width: u32,
    },

    #[error("objective value is not finite")]
    NonFiniteObjective,

    #[error("unknown objective `{0}`")]
    UnknownObjective(String),

    #[error("design point {height}x{width}: {source}")]
    AtDesignPoint {
        height: u32,
        width: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures raised while running the emulator itself, as
    /// opposed to malformed inputs.
    pub fn is_emulation_failure(&self) -> bool {
        match self {
            Error::ShapeMismatch { .. }
            | Error::BitwidthOverflow { .. }
            | Error::NonFiniteOperand
            | Error::CounterOverflow(_) => true,
            Error::InLayer { source, .. } | Error::AtDesignPoint { source, .. } => {
                source.is_emulation_failure()
            }
            _ => false,
        }
    }
}
