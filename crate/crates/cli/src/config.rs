//! Flat `key = value` configuration files. Keys mirror the flag names; keys
//! without a flag describe the generating process or the experiment grid.
//! Flags override file values, unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use panelgarch::{
    DgpSpec, EffectLaw, EstimatorKind, Innovation, LqInnovation, VolatilityInit,
};

use crate::error::{CliError, Result};

/// Accepted keys: the flag names, then the file-only keys for panel size,
/// experiment grid and the generating process.
const KNOWN_KEYS: &[&str] = &[
    "input",
    "output",
    "orders",
    "window",
    "level",
    "reps",
    "seed",
    "threads",
    "method",
    "fhs-draws",
    "c-h",
    "n",
    "t",
    "grid",
    "burn-in",
    "innovation",
    "sigma2",
    "beta",
    "phi",
    "psi",
    "tau",
    "nu",
    "mu-law",
    "omega-law",
    "estimators",
    "bootstrap-reps",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(&format!("config {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Validation(format!(
                    "config line {}: expected `key = value`, got {raw:?}",
                    idx + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Validation(format!(
                    "config line {}: unknown key `{key}`",
                    idx + 1
                )));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(CliError::Validation(format!(
                    "config line {}: key `{key}` given twice",
                    idx + 1
                )));
            }
        }
        Ok(Self { map })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn typed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| {
                CliError::Validation(format!("config key `{key}`: {e} (value {v:?})"))
            }),
        }
    }
}

/// Flag value when given, otherwise the config value under `key`.
pub fn resolve<T: FromStr>(flag: Option<T>, cfg: &FileConfig, key: &str) -> Result<Option<T>>
where
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.typed(key),
    }
}

pub fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| {
        CliError::Validation(format!("`{what}` is required (flag or config key)"))
    })
}

/// "P,Q,L,K" with nonnegative integer entries.
pub fn parse_orders(text: &str) -> Result<(usize, usize, usize, usize)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(CliError::Validation(format!(
            "orders must be P,Q,L,K, got {text:?}"
        )));
    }
    let mut vals = [0usize; 4];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| {
            CliError::Validation(format!(
                "orders component {part:?} is not a nonnegative integer"
            ))
        })?;
    }
    Ok((vals[0], vals[1], vals[2], vals[3]))
}

fn parse_f64_list(key: &str, text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| {
                CliError::Validation(format!("key `{key}`: {p:?} is not a number"))
            })
        })
        .collect()
}

fn parse_law(key: &str, text: &str) -> Result<EffectLaw> {
    let (name, args) = text.split_once(':').unwrap_or((text, ""));
    let nums = parse_f64_list(key, args)?;
    match (name.trim(), nums.as_slice()) {
        ("fixed", [v]) => Ok(EffectLaw::Fixed(*v)),
        ("normal", [mean, sd]) => Ok(EffectLaw::Normal {
            mean: *mean,
            sd: *sd,
        }),
        ("uniform", [lo, hi]) => Ok(EffectLaw::Uniform { lo: *lo, hi: *hi }),
        _ => Err(CliError::Validation(format!(
            "key `{key}`: expected fixed:<v>, normal:<mean>,<sd> or uniform:<lo>,<hi>, got {text:?}"
        ))),
    }
}

fn parse_innovation(text: &str) -> Result<Innovation> {
    let t = text.trim();
    if t == "normal" {
        return Ok(Innovation::Normal);
    }
    if let Some(df) = t.strip_prefix("t:") {
        let df: f64 = df.trim().parse().map_err(|_| {
            CliError::Validation(format!("innovation t:<df> needs a numeric df, got {text:?}"))
        })?;
        return Ok(Innovation::StudentT { df });
    }
    Err(CliError::Validation(format!(
        "innovation must be `normal` or `t:<df>`, got {text:?}"
    )))
}

/// Generating process from the config, starting at the benchmark design:
/// ARMA(1,1)-GARCH(1,1) with beta 3, phi 0.3, psi 0.3, tau 0.2, nu 0.4,
/// normal shocks, mu ~ N(0,1), omega ~ U(1,3) and no burn-in.
pub fn dgp_from_config(cfg: &FileConfig) -> Result<DgpSpec> {
    let mut spec = DgpSpec::benchmark();
    if let Some(v) = cfg.raw("beta") {
        spec.arma.beta = parse_f64_list("beta", v)?;
    }
    if let Some(v) = cfg.raw("phi") {
        spec.arma.phi = parse_f64_list("phi", v)?;
    }
    if let Some(v) = cfg.raw("psi") {
        spec.arma.psi = parse_f64_list("psi", v)?;
    }
    if let Some(v) = cfg.raw("tau") {
        spec.garch.tau = parse_f64_list("tau", v)?;
    }
    if let Some(v) = cfg.raw("nu") {
        spec.garch.nu = parse_f64_list("nu", v)?;
    }
    if let Some(v) = cfg.raw("innovation") {
        spec.innovation = parse_innovation(v)?;
    }
    if let Some(v) = cfg.raw("mu-law") {
        spec.mu_law = parse_law("mu-law", v)?;
    }
    if let Some(v) = cfg.raw("omega-law") {
        spec.omega_law = parse_law("omega-law", v)?;
    }
    if let Some(b) = cfg.typed::<usize>("burn-in")? {
        spec.burn_in = b;
    }
    spec.validate()?;
    Ok(spec)
}

/// "50x20,50x100" style (N, T) cells; comma or whitespace separated.
pub fn parse_grid(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut grid = Vec::new();
    for token in text
        .split([',', ' '])
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        let cell = token.split_once('x').and_then(|(n, t)| {
            Some((n.trim().parse().ok()?, t.trim().parse().ok()?))
        });
        match cell {
            Some(c) => grid.push(c),
            None => {
                return Err(CliError::Validation(format!(
                    "grid cells look like NxT, got {token:?}"
                )))
            }
        }
    }
    if grid.is_empty() {
        return Err(CliError::Validation("grid is empty".into()));
    }
    Ok(grid)
}

pub fn parse_estimators(text: &str) -> Result<Vec<EstimatorKind>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| EstimatorKind::parse(s).map_err(CliError::from))
        .collect()
}

/// Innovation law for `lq-verify`: `normal` (scale from `sigma2`),
/// `three-point:<p>`, or `garch` (coefficients from `tau` and `nu`).
pub fn lq_innovation_from_config(cfg: &FileConfig) -> Result<LqInnovation> {
    let sigma2 = cfg.typed::<f64>("sigma2")?.unwrap_or(1.0);
    let text = cfg.raw("innovation").unwrap_or("normal").trim();
    if text == "normal" {
        return Ok(LqInnovation::IidNormal { sigma2 });
    }
    if text == "garch" {
        let tau = match cfg.raw("tau") {
            Some(v) => parse_f64_list("tau", v)?,
            None => vec![0.2],
        };
        let nu = match cfg.raw("nu") {
            Some(v) => parse_f64_list("nu", v)?,
            None => vec![0.4],
        };
        return Ok(LqInnovation::Garch { tau, nu, sigma2 });
    }
    if let Some(p) = text.strip_prefix("three-point:") {
        let p: f64 = p.trim().parse().map_err(|_| {
            CliError::Validation(format!("three-point:<p> needs a numeric p, got {text:?}"))
        })?;
        return Ok(LqInnovation::ThreePoint { p });
    }
    Err(CliError::Validation(format!(
        "innovation must be `normal`, `three-point:<p>` or `garch`, got {text:?}"
    )))
}

/// `--c-h` sets a fixed pre-sample variance; absent means the unit's own
/// variance target.
pub fn volatility_init(c_h: Option<f64>) -> Result<VolatilityInit> {
    match c_h {
        None => Ok(VolatilityInit::UnconditionalVariance),
        Some(c) if c > 0.0 && c.is_finite() => Ok(VolatilityInit::Fixed(c)),
        Some(c) => Err(CliError::Validation(format!(
            "c-h must be a positive variance, got {c}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert!(FileConfig::parse("seed = 3\n").is_ok());
        let err = FileConfig::parse("sede = 3\n").unwrap_err();
        assert!(err.to_string().contains("unknown key `sede`"));
        let err = FileConfig::parse("seed = 3\nseed = 4\n").unwrap_err();
        assert!(err.to_string().contains("given twice"));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let cfg = FileConfig::parse("# experiment\n\nseed = 9\n").unwrap();
        assert_eq!(cfg.typed::<u64>("seed").unwrap(), Some(9));
    }

    #[test]
    fn orders_and_grid_parse() {
        assert_eq!(parse_orders("1, 1,0,2").unwrap(), (1, 1, 0, 2));
        assert!(parse_orders("1,1,1").is_err());
        assert_eq!(
            parse_grid("50x20, 100x50").unwrap(),
            vec![(50, 20), (100, 50)]
        );
        assert!(parse_grid("50:20").is_err());
    }

    #[test]
    fn dgp_overrides_apply_on_top_of_the_benchmark() {
        let cfg = FileConfig::parse("phi = 0.5\ntau = \ninnovation = t:8\n").unwrap();
        let spec = dgp_from_config(&cfg).unwrap();
        assert_eq!(spec.arma.phi, vec![0.5]);
        assert_eq!(spec.arma.beta, vec![3.0]);
        assert!(spec.garch.tau.is_empty());
        assert!(matches!(spec.innovation, Innovation::StudentT { df } if df == 8.0));
    }

    #[test]
    fn laws_parse() {
        let cfg = FileConfig::parse("mu-law = fixed:2\nomega-law = uniform:1,3\n").unwrap();
        let spec = dgp_from_config(&cfg).unwrap();
        assert!(matches!(spec.mu_law, EffectLaw::Fixed(v) if v == 2.0));
        assert!(matches!(spec.omega_law, EffectLaw::Uniform { lo, hi } if lo == 1.0 && hi == 3.0));
    }
}
