//! Möbius maps of the disk and numerical Riemann maps.

mod mobius;
mod zipper;

pub use mobius::{disk_distance, DiskAutomorphism};
pub use zipper::{
    BoundaryEntry, Direction, MapRecord, RiemannMap, ZipStep, DEFAULT_RESOLUTION, MAP_ACCURACY,
    MAP_FORMAT_VERSION,
};
