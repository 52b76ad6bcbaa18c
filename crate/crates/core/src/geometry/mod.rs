//! Parametric convex bodies and their metric geometry.

mod body;
mod distance;
mod enclosing;
mod projection;
mod steiner;

pub use body::{ConvexBody, Ellipse, Point2};
pub use distance::{
    disc_intersection_area, hausdorff_distance, hausdorff_distance_with, sym_diff_volume,
    sym_diff_volume_with, HausdorffEstimate, QmcConfig, VolumeEstimate, DEFAULT_HAUSDORFF_GRID,
};
pub use enclosing::{min_enclosing_circle, Circle};
pub use projection::{project, signed_distance, BoundaryProjection, NEWTON_MAX_ITER, NEWTON_TOL};
pub use steiner::{parallel_set_volume, steiner_data, InnerReach, Side, Square, SteinerData};
