// SPDX-License-Identifier: Apache-2.0

pub mod eigenstate;
pub mod fredholm;
pub mod lattice;
pub mod numkernel;
pub mod oracle;
pub mod splitstep;
pub mod verify;

pub use eigenstate::{build_eigenstate, decay_certificate, series_branch, Branch, DecayCertificate, EigenstateBundle, EigenstateError};
pub use fredholm::{
    essential_spectrum_bands, essential_spectrum_cloud, fredholm_index, winding_number, Arc, Band, CircleCurve, FredholmError, IndexReport,
    SamplingOptions, SpectralBands, SpectralCloud, Warning,
};
pub use lattice::{LatticeError, OperatorDraft, PeriodicTailSequence, Side, StrictlyLocalOperator, Violation};
pub use num_complex::Complex64;
pub use numkernel::{ComplexMatrix, CornerTridiagonal, NumError};
pub use oracle::{apply, circulant_spectrum, geometric_mean_limit, OracleError, SiteVector};
pub use splitstep::{lambda_inverse, lambda_map, ExtendedHalfLine, Sign, SplitStepError, SplitStepModel, TailLimits, TheoremBReport};
pub use verify::{verify_operator, verify_splitstep, CheckOutcome, CheckStatus, VerifyOptions, VerifyReport};
