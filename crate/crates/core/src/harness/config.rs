//! Flat `key = value` experiment configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::codebook::{SchemeKind, SchemeSpec};
use crate::error::{Error, Result};
use crate::harvester::RectennaParams;
use crate::waveform::{dbm_to_watts, PassbandGrid};

/// One entry of the `scheme` list: `name[:n_t[:n_a[:m]]]`. Missing fields
/// fall back to the `nt`, `na` and `mod_order` keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeEntry {
    pub kind: SchemeKind,
    pub n_t: Option<usize>,
    pub n_a: Option<usize>,
    pub m: Option<usize>,
}

impl SchemeEntry {
    pub fn new(kind: SchemeKind) -> Self {
        Self { kind, n_t: None, n_a: None, m: None }
    }

    pub fn with(kind: SchemeKind, n_t: usize, n_a: usize, m: usize) -> Self {
        Self { kind, n_t: Some(n_t), n_a: Some(n_a), m: Some(m) }
    }
}

impl FromStr for SchemeEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':').map(str::trim);
        let kind: SchemeKind = parts.next().unwrap_or_default().parse()?;
        let mut field = |name: &str| -> Result<Option<usize>> {
            parts
                .next()
                .map(|p| p.parse::<usize>().map_err(|_| Error::InvalidScheme(format!("bad {name} '{p}' in '{s}'"))))
                .transpose()
        };
        let entry = Self { kind, n_t: field("n_t")?, n_a: field("n_a")?, m: field("m")? };
        if parts.next().is_some() {
            return Err(Error::InvalidScheme(format!("too many fields in '{s}'")));
        }
        Ok(entry)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<SchemeEntry>,
    pub n_t: usize,
    /// Active antennas for the generalized schemes; the others use one.
    pub n_a: usize,
    pub mod_order: usize,
    pub n_ir: usize,
    pub n_eve: usize,
    pub d_eh: Option<f64>,
    pub d_ir: Option<f64>,
    pub d_eve: Option<f64>,
    pub rho: Vec<f64>,
    /// `P_T / N0` in dB.
    pub snr_db: Vec<f64>,
    pub n_subbands: Vec<usize>,
    pub pt_dbm: f64,
    pub f1_hz: f64,
    pub delta_f_hz: f64,
    pub rectenna: RectennaParams,
    pub trials: usize,
    pub zdc_trials: usize,
    pub n_channels: usize,
    pub n_noise: usize,
    pub analytic_channels: usize,
    pub eve: bool,
    pub whiten: bool,
    pub noiseless: bool,
    pub flat_subbands: bool,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schemes: vec![SchemeEntry::new(SchemeKind::Ssk)],
            n_t: 4,
            n_a: 2,
            mod_order: 4,
            n_ir: 2,
            n_eve: 2,
            d_eh: Some(1.5),
            d_ir: None,
            d_eve: None,
            rho: vec![0.0],
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            n_subbands: vec![1, 3, 5],
            pt_dbm: 36.0,
            f1_hz: 1e5,
            delta_f_hz: 1e3,
            rectenna: RectennaParams::default(),
            trials: 10_000,
            zdc_trials: 500,
            n_channels: 200,
            n_noise: 1000,
            analytic_channels: 200,
            eve: false,
            whiten: false,
            noiseless: false,
            flat_subbands: true,
            seed: 1,
            out: None,
        }
    }
}

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().map_err(|_| format!("cannot parse '{v}'")))
        .collect()
}

fn scalar<T: FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse::<T>().map_err(|_| format!("cannot parse '{value}'"))
}

fn distance(value: &str) -> std::result::Result<Option<f64>, String> {
    if value.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        scalar(value).map(Some)
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected 'key = value', got '{content}'")))?;
            cfg.set(key.trim(), value.trim()).map_err(|msg| cfg_err(line, msg))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let r = &mut self.rectenna;
        match key {
            "scheme" => {
                self.schemes = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(|v| v.parse().map_err(|e: Error| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "nt" => self.n_t = scalar(value)?,
            "na" => self.n_a = scalar(value)?,
            "mod_order" => self.mod_order = scalar(value)?,
            "n_ir" => self.n_ir = scalar(value)?,
            "n_eh" => r.n_eh = scalar(value)?,
            "n_eve" => self.n_eve = scalar(value)?,
            "d_eh" => self.d_eh = distance(value)?,
            "d_ir" => self.d_ir = distance(value)?,
            "d_eve" => self.d_eve = distance(value)?,
            "rho" => self.rho = list(value)?,
            "snr_db" => self.snr_db = list(value)?,
            "n_subbands" => self.n_subbands = list(value)?,
            "pt_dbm" => self.pt_dbm = scalar(value)?,
            "f1_hz" => self.f1_hz = scalar(value)?,
            "delta_f_hz" => self.delta_f_hz = scalar(value)?,
            "k2" => r.k2 = scalar(value)?,
            "k4" => r.k4 = scalar(value)?,
            "r_ant" => r.r_ant = scalar(value)?,
            "gamma_in_dbm" => r.gamma_in = dbm_to_watts(scalar(value)?),
            "gamma_sat_dbm" => r.gamma_sat = dbm_to_watts(scalar(value)?),
            "beta2" => r.beta2 = scalar(value)?,
            "beta4" => r.beta4 = scalar(value)?,
            "r_load" => r.r_load = scalar(value)?,
            "trials" => self.trials = scalar(value)?,
            "zdc_trials" => self.zdc_trials = scalar(value)?,
            "n_channels" => self.n_channels = scalar(value)?,
            "n_noise" => self.n_noise = scalar(value)?,
            "analytic_channels" => self.analytic_channels = scalar(value)?,
            "eve" => self.eve = scalar(value)?,
            "whiten" => self.whiten = scalar(value)?,
            "noiseless" => self.noiseless = scalar(value)?,
            "flat_subbands" => self.flat_subbands = scalar(value)?,
            "seed" => self.seed = scalar(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Resolved scheme specifications, in configuration order.
    pub fn specs(&self) -> Result<Vec<SchemeSpec>> {
        self.schemes
            .iter()
            .map(|e| {
                let n_a = e.n_a.unwrap_or(if e.kind.is_generalized() { self.n_a } else { 1 });
                SchemeSpec::new(e.kind, e.n_t.unwrap_or(self.n_t), n_a, e.m.unwrap_or(self.mod_order))
            })
            .collect()
    }

    /// Total transmit power in watts.
    pub fn p_t(&self) -> f64 {
        dbm_to_watts(self.pt_dbm)
    }

    /// Reference noise variance `P_T / 10^(snr_db / 10)`.
    pub fn sigma2(&self, snr_db: f64) -> f64 {
        self.p_t() / 10f64.powf(snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config { line: 0, msg });
        if self.schemes.is_empty() {
            return bad("scheme list is empty".into());
        }
        fn ascending<T: PartialOrd>(v: &[T]) -> bool {
            v.windows(2).all(|p| p[0] < p[1])
        }
        for (name, ok, empty) in [
            ("rho", ascending(&self.rho), self.rho.is_empty()),
            ("snr_db", ascending(&self.snr_db), self.snr_db.is_empty()),
            ("n_subbands", ascending(&self.n_subbands), self.n_subbands.is_empty()),
        ] {
            if empty {
                return bad(format!("{name} grid is empty"));
            }
            if !ok {
                return bad(format!("{name} grid must be strictly ascending"));
            }
        }
        if self.rho.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("rho values must lie in [0, 1]".into());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_db values must be finite".into());
        }
        if self.n_subbands[0] == 0 {
            return bad("n_subbands must be at least 1".into());
        }
        if self.trials == 0 || self.zdc_trials == 0 || self.analytic_channels == 0 {
            return bad("trial counts must be at least 1".into());
        }
        if self.n_channels < 100 || self.n_noise < 100 {
            return bad("n_channels and n_noise must be at least 100".into());
        }
        if self.n_ir == 0 || self.n_eve == 0 {
            return bad("antenna counts must be at least 1".into());
        }
        if !self.pt_dbm.is_finite() {
            return bad("pt_dbm must be finite".into());
        }
        for d in [self.d_eh, self.d_ir, self.d_eve].into_iter().flatten() {
            if !(d > 0.0) || !d.is_finite() {
                return bad(format!("distance {d} m must be positive"));
            }
        }
        self.rectenna.validate()?;
        let with_an = self.rho.iter().any(|&r| r > 0.0);
        for spec in self.specs()? {
            if with_an && self.n_ir >= spec.n_t {
                return bad(format!("{}: rho > 0 needs n_ir < n_t for a nullspace", spec.kind));
            }
        }
        for &n in &self.n_subbands {
            PassbandGrid::standard(self.f1_hz, self.delta_f_hz, n)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_keys_lists_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# sweep\nscheme = ssk, gsm:4:2:16\nnt = 4\nrho = 0, 0.5 # inline\nsnr_db = 0,10,20\nn_subbands = 1\nd_ir = none\nd_eve = 2.5\neve = true\n",
        )
        .unwrap();
        assert_eq!(cfg.schemes.len(), 2);
        assert_eq!(cfg.schemes[1], SchemeEntry::with(SchemeKind::Gsm, 4, 2, 16));
        assert_eq!(cfg.rho, vec![0.0, 0.5]);
        assert_eq!(cfg.snr_db, vec![0.0, 10.0, 20.0]);
        assert_eq!(cfg.d_ir, None);
        assert_eq!(cfg.d_eve, Some(2.5));
        assert!(cfg.eve);
        let specs = cfg.specs().unwrap();
        assert_eq!((specs[0].n_a, specs[0].m), (1, 1));
        assert_eq!(specs[1].m, 16);
    }

    #[test]
    fn unknown_key_reports_line() {
        match ExperimentConfig::parse("nt = 4\n\nbogus = 1\n") {
            Err(Error::Config { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unsorted_and_empty_grids() {
        assert!(ExperimentConfig::parse("snr_db = 10, 5").is_err());
        assert!(ExperimentConfig::parse("rho =").is_err());
        assert!(ExperimentConfig::parse("rho = 1.5").is_err());
        assert!(ExperimentConfig::parse("trials = 0").is_err());
        assert!(ExperimentConfig::parse("nt 4").is_err());
    }

    #[test]
    fn an_requires_a_nullspace() {
        assert!(ExperimentConfig::parse("nt = 2\nn_ir = 2\nrho = 0.5").is_err());
        assert!(ExperimentConfig::parse("nt = 2\nn_ir = 2\nrho = 0").is_ok());
    }

    #[test]
    fn noise_variance_from_snr() {
        let cfg = ExperimentConfig { pt_dbm: 30.0, ..Default::default() };
        assert!((cfg.sigma2(20.0) - 0.01).abs() < 1e-15);
    }
}
