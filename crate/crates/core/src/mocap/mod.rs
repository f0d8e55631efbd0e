//! Marker ingestion, joint derivation and velocity estimation.

pub mod filter;
pub mod io;
pub mod skeleton;
pub mod take;
pub mod velocity;

pub use io::{load_take, load_take_with_sidecar, write_take, TakeMeta};
pub use skeleton::{JointRecipe, SkeletonMap};
pub use take::{JointTake, MarkerTake, MotionKind, JOINT_COLUMNS, JOINT_COUNT, MARKER_COUNT};
pub use velocity::velocity;
