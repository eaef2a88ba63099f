//! Exhaustive reference solvers for small instances and a seeded generator of
//! geometric test instances.

mod exact;
mod gen;

pub use exact::{
    exact_cover, exact_dsc, exact_mpc, exact_pack, exact_subsidy, PackMode, PackOptimum,
    ENUMERATION_LIMIT, SUBSIDY_STATE_LIMIT,
};
pub use gen::{gen_instance, CostSource, GenParams, Generated};
