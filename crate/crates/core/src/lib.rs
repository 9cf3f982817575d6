//! Characterisation toolkit for assemblages in EPR (steering) scenarios.
//!
//! The crate covers the full pipeline from raw assemblages to certificates:
//!
//! * [`words`]: the word algebra over black-box measurement events and the
//!   almost-quantum word set.
//! * [`quantum`]: Hermitian blocks, assemblages, correlations, Born-rule
//!   generation and non-signalling verification.
//! * [`tomography`]: tomographically complete measurement frames and the
//!   linear-inversion reconstruction map.
//! * [`moment`]: compilation of almost-quantum moment-matrix membership into
//!   semidefinite feasibility problems, plus linear optimisation over the
//!   same feasible set.
//! * [`sdp`]: a self-contained dense primal-dual interior-point solver with
//!   the Hermitian-to-real embedding and Gram factorisation it needs.
//! * [`ghjw`]: the constructive equivalence between bipartite non-signalling
//!   assemblages and quantum realizations, in both directions.
//! * [`lift`]: generating Bell correlations from certified assemblages and
//!   lifting Bell certificates of tomographic correlations back to
//!   assemblage certificates.
//! * [`fixtures`]: seeded reference objects (singlet, PR box, random
//!   non-signalling assemblages) used by the CLI and the test suite.
//! * [`files`]: the JSON file formats shared with the CLI.

pub mod error;
pub mod files;
pub mod fixtures;
pub mod ghjw;
pub mod lift;
pub mod linalg;
pub mod moment;
pub mod quantum;
pub mod sdp;
pub mod tomography;
pub mod words;

pub use error::{Error, Result};
pub use linalg::{CMatrix, RMatrix};
pub use moment::{MembershipReport, MomentKind, MomentMatrix};
pub use quantum::{Assemblage, Correlation, MeasurementSet, NsReport};
pub use sdp::{SdpProblem, SdpSolution, SolverOptions, SolverStatus};
pub use tomography::TomographyFrame;
pub use words::{Letter, PartyDims, PartyLayout, ProductKey, Scenario, Word};
