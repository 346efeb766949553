//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! transfer.alpha = 1.6
//! grid.points = 2048
//! noise.lambdas = -0.5:0.05:0.5
//! ```
//!
//! Grids accept `start:step:stop` (inclusive), a comma list, or an empty
//! value. Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use soc_sta::grid::{GridSettings, SpatialGrid};
use soc_sta::morse::MorseSpec;
use soc_sta::numerics::OdeSettings;
use soc_sta::pulse::{effective_g, Interactions, RawCouplings, Scheme, TransferSpec};
use soc_sta::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub depth: f64,
    pub n: usize,
    pub l: usize,
    pub alpha: f64,
    pub t_f: f64,
    pub scheme: Scheme,
    pub c: f64,
    pub sample_count: usize,
    /// Raw per-spin couplings; `None` means the scheme decides.
    pub couplings: Option<RawCouplings>,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub grid_dt: f64,
    pub record_every: usize,
    pub two_level_dt: f64,
    pub lambdas: Vec<f64>,
    pub lambda_primes: Vec<f64>,
    pub trajectories: usize,
    pub seed: u64,
    pub noise_dt: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            depth: 8.0,
            n: 0,
            l: 1,
            alpha: 1.6,
            t_f: 10.0,
            scheme: Scheme::Raman,
            c: 0.1,
            sample_count: soc_sta::pulse::DEFAULT_SAMPLES,
            couplings: None,
            x_min: -5.0,
            x_max: 25.0,
            points: 2048,
            grid_dt: 1e-3,
            record_every: 10,
            two_level_dt: 1e-3,
            lambdas: range(-0.5, 0.05, 0.5),
            lambda_primes: range(0.0, 0.05, 1.0),
            trajectories: 0,
            seed: 1,
            noise_dt: 1e-3,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Inclusive arithmetic grid, computed by index so endpoints are exact.
pub fn range(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| {
            let v = start + step * i as f64;
            // Snap values like 0.30000000000000004 onto the decimal grid.
            (v * 1e12).round() / 1e12
        })
        .collect()
}

fn bad(key: &str, value: &str, why: &str) -> Error {
    Error::Config(format!("{key} = {value:?}: {why}"))
}

fn real(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| bad(key, v, "expected a number"))?;
    if !x.is_finite() {
        return Err(bad(key, v, "must be finite"));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| bad(key, v, "expected a non-negative integer"))
}

fn values(key: &str, v: &str) -> Result<Vec<f64>> {
    let v = v.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad(key, v, "expected start:step:stop"));
        }
        let (a, h, b) = (real(key, parts[0])?, real(key, parts[1])?, real(key, parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(bad(key, v, "need step > 0 and stop >= start"));
        }
        return Ok(range(a, h, b));
    }
    v.split(',').map(|p| real(key, p.trim())).collect()
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), lineno + 1).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key}", lineno + 1)));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let mut raw = self.couplings.unwrap_or_default();
        match key {
            "morse.depth" => self.depth = real(key, v)?,
            "transfer.n" => self.n = count(key, v)?,
            "transfer.l" => self.l = count(key, v)?,
            "transfer.alpha" => self.alpha = real(key, v)?,
            "transfer.t_f" => self.t_f = real(key, v)?,
            "transfer.scheme" => self.scheme = v.parse()?,
            "design.c" => self.c = real(key, v)?,
            "design.sample_count" => self.sample_count = count(key, v)?,
            "interaction.g_up_up" => raw.up_up = real(key, v)?,
            "interaction.g_up_down" => raw.up_down = real(key, v)?,
            "interaction.g_down_up" => raw.down_up = real(key, v)?,
            "interaction.g_down_down" => raw.down_down = real(key, v)?,
            "grid.x_min" => self.x_min = real(key, v)?,
            "grid.x_max" => self.x_max = real(key, v)?,
            "grid.points" => self.points = count(key, v)?,
            "grid.dt" => self.grid_dt = real(key, v)?,
            "grid.record_every" => self.record_every = count(key, v)?,
            "twolevel.dt" => self.two_level_dt = real(key, v)?,
            "noise.lambdas" => self.lambdas = values(key, v)?,
            "noise.lambda_primes" => self.lambda_primes = values(key, v)?,
            "noise.trajectories" => self.trajectories = count(key, v)?,
            "noise.seed" => self.seed = v.parse().map_err(|_| bad(key, v, "expected an unsigned integer"))?,
            "noise.dt" => self.noise_dt = real(key, v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            other => return Err(Error::Config(format!("unknown key {other}"))),
        }
        if key.starts_with("interaction.") {
            self.couplings = Some(raw);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.transfer_spec()?;
        SpatialGrid::new(self.x_min, self.x_max, self.points)?;
        for (name, dt) in [
            ("grid.dt", self.grid_dt),
            ("twolevel.dt", self.two_level_dt),
            ("noise.dt", self.noise_dt),
        ] {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.sample_count < 4 {
            return Err(Error::Config("design.sample_count must be at least 4".into()));
        }
        if self.trajectories == 1 {
            return Err(Error::Config("noise.trajectories must be 0 or at least 2".into()));
        }
        Ok(())
    }

    pub fn morse(&self) -> Result<MorseSpec> {
        MorseSpec::new(self.depth)
    }

    /// Interactions are on when couplings are given explicitly or the
    /// scheme compensates for them.
    pub fn is_interacting(&self) -> bool {
        self.couplings.is_some_and(|g| !g.is_zero())
            || (self.couplings.is_none() && self.scheme == Scheme::SoDirectionInteracting)
    }

    /// Explicit couplings, or equal ones giving an effective `g11 = 0.3`
    /// for the interacting scheme.
    pub fn raw_couplings(&self) -> Result<RawCouplings> {
        match self.couplings {
            Some(g) => Ok(g),
            None if self.scheme == Scheme::SoDirectionInteracting => {
                RawCouplings::uniform_with_g11(&self.morse()?, self.n, 0.3)
            }
            None => Ok(RawCouplings::default()),
        }
    }

    pub fn effective_interactions(&self) -> Result<Interactions> {
        effective_g(&self.raw_couplings()?, &self.morse()?, self.n, self.l)
    }

    /// Spec for design; carries the effective g only for the compensating scheme.
    pub fn transfer_spec(&self) -> Result<TransferSpec> {
        let mut spec = TransferSpec::new(self.morse()?, self.n, self.alpha, self.t_f, self.c, self.scheme)?;
        if self.l != self.n + 1 {
            return Err(Error::Config(format!(
                "transfer.l must equal transfer.n + 1, got {}",
                self.l
            )));
        }
        if self.scheme == Scheme::SoDirectionInteracting {
            spec = spec.with_interactions(self.effective_interactions()?);
        }
        Ok(spec)
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.x_min, self.x_max, self.points)
    }

    pub fn grid_settings(&self) -> Result<GridSettings> {
        Ok(GridSettings {
            dt: self.grid_dt,
            couplings: self.raw_couplings()?,
            record_every: self.record_every,
            norm_tolerance: None,
        })
    }

    pub fn two_level_settings(&self) -> OdeSettings {
        OdeSettings::fixed(self.two_level_dt)
    }

    /// Every key with its current value; parsing it back gives `self`.
    pub fn snapshot(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("morse.depth", self.depth.to_string());
        put("transfer.n", self.n.to_string());
        put("transfer.l", self.l.to_string());
        put("transfer.alpha", self.alpha.to_string());
        put("transfer.t_f", self.t_f.to_string());
        put("transfer.scheme", self.scheme.to_string());
        put("design.c", self.c.to_string());
        put("design.sample_count", self.sample_count.to_string());
        if let Some(g) = self.couplings {
            put("interaction.g_up_up", g.up_up.to_string());
            put("interaction.g_up_down", g.up_down.to_string());
            put("interaction.g_down_up", g.down_up.to_string());
            put("interaction.g_down_down", g.down_down.to_string());
        }
        put("grid.x_min", self.x_min.to_string());
        put("grid.x_max", self.x_max.to_string());
        put("grid.points", self.points.to_string());
        put("grid.dt", self.grid_dt.to_string());
        put("grid.record_every", self.record_every.to_string());
        put("twolevel.dt", self.two_level_dt.to_string());
        put("noise.lambdas", list(&self.lambdas));
        put("noise.lambda_primes", list(&self.lambda_primes));
        put("noise.trajectories", self.trajectories.to_string());
        put("noise.seed", self.seed.to_string());
        put("noise.dt", self.noise_dt.to_string());
        put("output.dir", self.out_dir.display().to_string());
        s
    }

    /// Key/value map of [`Self::snapshot`] for JSON manifests.
    pub fn snapshot_map(&self) -> BTreeMap<String, String> {
        self.snapshot()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_canonical_case() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(
            (cfg.depth, cfg.n, cfg.l, cfg.alpha, cfg.t_f, cfg.c),
            (8.0, 0, 1, 1.6, 10.0, 0.1)
        );
        assert_eq!(cfg.lambdas.len(), 21);
        assert_eq!(cfg.lambdas[10], 0.0);
        assert_eq!(cfg.lambda_primes.last(), Some(&1.0));
    }

    #[test]
    fn parses_and_rejects() {
        let cfg = RunConfig::parse("# c\ntransfer.alpha = 2 # trailing\n\nnoise.lambdas = 0.1, 0.2\n").unwrap();
        assert_eq!(cfg.alpha, 2.0);
        assert_eq!(cfg.lambdas, vec![0.1, 0.2]);
        assert!(RunConfig::parse("transfer.colour = red").is_err());
        assert!(RunConfig::parse("transfer.alpha = 1\ntransfer.alpha = 2").is_err());
        assert!(RunConfig::parse("grid.points = 1000").is_err());
        assert!(RunConfig::parse("transfer.alpha").is_err());
        assert!(RunConfig::parse("design.c = 0").is_err());
        assert!(RunConfig::parse("transfer.l = 2").is_err());
        assert!(RunConfig::parse("noise.lambdas =").unwrap().lambdas.is_empty());
    }

    #[test]
    fn snapshot_round_trip() {
        let mut cfg =
            RunConfig::parse("transfer.scheme = so_direction_interacting\nnoise.lambdas = -0.2:0.1:0.2").unwrap();
        cfg.couplings = Some(cfg.raw_couplings().unwrap());
        let back = RunConfig::parse(&cfg.snapshot()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn interaction_defaults() {
        let plain = RunConfig::parse("transfer.scheme = so_direction").unwrap();
        assert!(!plain.is_interacting());
        let inter = RunConfig::parse("transfer.scheme = so_direction_interacting").unwrap();
        assert!(inter.is_interacting());
        let g = inter.effective_interactions().unwrap();
        assert!((g.g11 - 0.3).abs() < 1e-12);
        let explicit = RunConfig::parse("interaction.g_up_up = 0.5").unwrap();
        assert_eq!(explicit.raw_couplings().unwrap().up_up, 0.5);
        assert_eq!(explicit.raw_couplings().unwrap().down_down, 0.0);
    }
}
