//! Independent checks of a beamforming solution: S-procedure certificates,
//! exact worst-case SINRs, rank structure and optimality residuals.

mod kkt;
mod lmi;
mod rank;
mod trs;
mod worst_case;
mod xmat;

pub use kkt::{kkt_residuals, p2_power_oracle, KktReport, Residual, UserKkt};
pub use lmi::{
    check_lmi_feasibility, ConstraintKind, ConstraintReport, FeasibilityReport, LmiBlock, MuSearch,
    VERDICT_TOL,
};
pub use rank::{
    check_rank_structure, check_solution_rank_structure, orthogonal_complement_basis, CheckStatus,
    Multipliers, RankCheck, RankReport, RANK_TOL,
};
pub use trs::{solve_trs, trs_objective, TrsSolution};
pub use worst_case::{worst_case_eve_sinr, worst_case_feasible, worst_case_user_sinr, OracleMethod, WorstCase};
pub use xmat::{build_x_matrices, x_matrices_from};
