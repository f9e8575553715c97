//! Comma-separated output. Probabilities and harvesting metrics are written
//! in scientific notation, sweep variables in shortest round-trip form.

use std::io::Write;

use crate::error::Result;
use crate::harness::sweep::{AnalysisRow, BerRow, EsrRow, ZdcRow};

pub trait CsvRecord {
    fn header() -> &'static str;
    fn record(&self) -> String;
}

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

fn opt_sci(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

impl CsvRecord for BerRow {
    fn header() -> &'static str {
        "scheme,n_subbands,rho,snr_db,ber_ir,ber_ir_std_err,aber_ir_analytic,ber_eve,ber_eve_std_err,aber_eve_analytic,n_trials,low_confidence"
    }

    fn record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.n_subbands,
            self.rho,
            self.snr_db,
            sci(self.ber_ir),
            sci(self.ber_ir_std_err),
            sci(self.aber_ir_analytic),
            opt_sci(self.ber_eve),
            opt_sci(self.ber_eve_std_err),
            opt_sci(self.aber_eve_analytic),
            self.n_trials,
            self.low_confidence
        )
    }
}

impl CsvRecord for ZdcRow {
    fn header() -> &'static str {
        "scheme,n_subbands,rho,z_dc,std_err,p_dc_w,n_trials"
    }

    fn record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.scheme,
            self.n_subbands,
            self.rho,
            sci(self.z_dc),
            sci(self.std_err),
            sci(self.p_dc_w),
            self.n_trials
        )
    }
}

impl CsvRecord for EsrRow {
    fn header() -> &'static str {
        "scheme,rho,n_subbands,snr_db,esr_bits,std_err"
    }

    fn record(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{}",
            self.scheme,
            self.rho,
            self.n_subbands,
            self.snr_db,
            self.esr_bits,
            sci(self.std_err)
        )
    }
}

impl CsvRecord for AnalysisRow {
    fn header() -> &'static str {
        "scheme,snr_db,aber_analytic,aber_simulated,aber_eve_analytic,aber_eve_simulated"
    }

    fn record(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.scheme,
            self.snr_db,
            sci(self.aber_analytic),
            sci(self.aber_simulated),
            sci(self.aber_eve_analytic),
            sci(self.aber_eve_simulated)
        )
    }
}

pub fn write_csv<R: CsvRecord, W: Write>(rows: &[R], mut out: W) -> Result<()> {
    writeln!(out, "{}", R::header())?;
    for r in rows {
        writeln!(out, "{}", r.record())?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_csv_string<R: CsvRecord>(rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}
