//! Configuration, sweeps, CSV output and the validation suite.

pub mod config;
pub mod csv;
pub mod sweep;
pub mod validate;

pub use config::{ExperimentConfig, SchemeEntry};
pub use csv::{to_csv_string, write_csv, CsvRecord};
pub use sweep::{
    run_analysis, run_ber_sweep, run_esr_sweep, run_zdc_sweep, zdc_samples, AnalysisRow, BerRow, EsrRow, ZdcRow,
};
pub use validate::{validate, ValidateOptions, ValidationReport};
