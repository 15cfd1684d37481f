//! Density-based clustering of spectrogram frames.
//!
//! Every frame (column) of a magnitude spectrogram is a point in
//! `bins`-dimensional space. Frames are compared with the squared Euclidean
//! distance, DBSCAN's radius is picked at the knee of the sorted k-NN distance
//! curve, and [`dsc_partition`] applies the procedure twice to split the
//! spectrogram into impulsive disturbances, the cyclic component and noise.

mod dbscan;
mod distance;
mod knee;
mod partition;

pub use dbscan::{dbscan, DbscanParams, FrameLabels, PointState, OUTLIER};
pub use distance::{pairwise_distances, DistanceMatrix};
pub use knee::{estimate_epsilon, knee_point, kth_neighbor_distances, EpsilonEstimate, Knee};
pub use partition::{dsc_partition, ClassPartition, DscConfig, FrameClass, StageDiagnostics};
