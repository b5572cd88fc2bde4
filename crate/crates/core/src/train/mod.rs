//! placeholder
pub struct TrainConfig;
pub struct TrainReport;
