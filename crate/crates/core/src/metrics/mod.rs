//! Selection and discrimination metrics.

mod curve;
mod kendall;
mod rank;
mod selection;

pub use curve::{cv_threshold_curve, rate_grid, threshold_curve, CvCurves, FoldCurves, ThresholdCurve, ThresholdPoint};
pub use kendall::kendall_tau;
pub use rank::{auc, aucpr, wilcoxon_statistic, Wilcoxon};
pub use selection::{selection_metrics, SelectionReport};
