//! Ingestion of delimited loss/forecast tables and meta grids, and
//! persistence of reports.
//!
//! Input tables are comma-separated UTF-8 with a header row, `.` as the
//! decimal separator and no thousands separators. Lines starting with `#`
//! are comments. Missing or malformed cells are errors; nothing is imputed.

mod grid;
mod manifest;
mod panel;
mod write;

pub use grid::load_meta_grid;
pub use manifest::{DatasetManifest, InputKind, SignConvention, FORMAT_VERSION};
pub use panel::{load_dataset, load_panel, Dataset, ForecastTable};
pub use write::{load_report, render_report, write_plot_series, write_report, OutputFormat};
