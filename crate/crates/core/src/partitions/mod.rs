//! Exact partition counts, uniform sampling and occupancy statistics.

pub mod cache;
pub mod levels;
pub mod sample;
pub mod stats;
pub mod table;

pub use levels::LevelTable;
pub use sample::{sample_many, sample_partition, OccupancyVector, SampleConvention};
pub use stats::{condensate_statistics, BandFraction, CondensateSummary};
pub use table::{count_at_most_k, most_probable_parts, Count, CountMode, PartitionRow, PartitionTable};
