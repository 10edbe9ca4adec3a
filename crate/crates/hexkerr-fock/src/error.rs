use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The occupation-vector enumeration would exceed the state cap.
    #[error("basis holds more than {cap} occupation vectors")]
    BasisTooLarge { cap: usize },

    /// An operator under construction would exceed the entry cap.
    #[error("operator needs more than {cap} nonzero entries on this basis")]
    OperatorTooLarge { cap: usize },

    /// Two operands were built on bases with different cutoffs.
    #[error("operators live on different bases")]
    BasisMismatch,

    /// A hexagonal mode index was required but mode 0 was given.
    #[error("mode {0} is not hexagonal")]
    NotHexagonal(usize),

    /// The pump pair terms need two photons in mode 0 to act at all.
    #[error("mode-0 cutoff must be at least 2 for the pair-creation terms, got {0}")]
    PumpCutoffTooSmall(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
