//! Lagrangian solution formula, blow-up clock and existence criteria for the
//! generalized Proudman–Johnson equation u_txx + u·u_xxx − a·u_x·u_xx = 0.

pub mod bracket;
pub mod criteria;
pub mod error;
pub mod eta;
pub mod eulerian;
pub mod flowmap;
pub mod profiles;
pub mod quadrature;
pub mod reference;

pub use bracket::{BoundaryCondition, Integrability, ModelParams, Regime};
pub use criteria::{classify, ClauseId, CriteriaReport, Verdict};
pub use error::{Error, Result};
pub use eta::{solve_eta, solve_eta_with, EtaStatus, EtaTrajectory, Tolerances};
pub use eulerian::{CompareError, EulerianRun, EulerianStatus, VorticityState};
pub use flowmap::{FlowMap, FlowSnapshot};
pub use profiles::{make_profile, InitialProfile, ProfileKind};
