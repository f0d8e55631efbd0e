//! Per-joint importance from learned weight vectors, and its CSV / SVG report.

pub mod profile;
pub mod report;

pub use profile::{
    joint_importance, minmax_normalize, reduce_to_groups, JointImportance, GROUP_COUNT, GROUP_MEMBERS,
    GROUP_NAMES,
};
pub use report::{importance_report, profiles_from_models, radar_svg, summarize, write_importance_report, GroupSummary};
