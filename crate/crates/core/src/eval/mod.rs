//! Experimental protocols and machine-readable reports.

mod histogram;
mod protocol;
mod report;

pub use histogram::{
    score_histograms, Histogram, ModelHistograms, PairHistograms, ScoreHistogramReport,
    HISTOGRAM_RANGE,
};
pub use protocol::{
    rank1_over_probes, run_all_vs_all, run_unknown_probe_pose, FeatureMode, ProtocolConfig,
};
pub use report::{config_hash, DegradationBucket, ProbeOutcome, RecognitionReport};
