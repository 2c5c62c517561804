use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Deserializer, Serialize};

use crate::disorder::{DisorderLaw, LawSpec};
use crate::error::{Error, Result};

/// Experiment settings. The same fields come from the TOML file and from
/// flags; a flag wins over the file.
#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Disorder law: gaussian or rademacher (tables through the config file)
    #[arg(long, value_parser = law_name)]
    pub law: Option<LawSpec>,
    /// Lattice dimension, 1 to 3
    #[arg(long)]
    pub d: Option<usize>,
    /// Inverse temperature(s), comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub beta: Option<Vec<f64>>,
    /// Polymer length(s) or kernel horizon
    #[arg(long, short = 'n', value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub n: Option<Vec<usize>>,
    /// Moment exponent(s)
    #[arg(long, short = 'p', value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub p: Option<Vec<f64>>,
    /// Temperature increment(s)
    #[arg(long, short = 'u', value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub u: Option<Vec<f64>>,
    /// Pinning strength(s)
    #[arg(long, short = 'v', value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub v: Option<Vec<f64>>,
    /// Base inverse temperature of chaos-check
    #[arg(long)]
    pub beta_base: Option<f64>,
    /// Number of independent environments
    #[arg(long, short = 'R')]
    pub replicas: Option<usize>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// simulate: moment, size_biased or log_mean
    #[arg(long)]
    pub functional: Option<String>,
    /// phi: tail of the kernel beyond the table, fitted or truncated
    #[arg(long)]
    pub tail: Option<String>,
    /// Numerical tolerance override
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Kernel table CSV read by phi
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    /// CSV output path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary path (stdout when absent)
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// accept: criteria to run
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub only: Option<Vec<u32>>,
}

fn law_name(s: &str) -> std::result::Result<LawSpec, String> {
    s.parse::<DisorderLaw>().map_err(|e| e.to_string())?;
    Ok(LawSpec::Name(s.to_string()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(de: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Some(match OneOrMany::deserialize(de)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    }))
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Settings> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Settings::from_toml(&text)
    }

    /// `top` overrides `self` field by field.
    pub fn overlay(self, top: Settings) -> Settings {
        overlay!(
            self, top, law, d, beta, n, p, u, v, beta_base, replicas, seed, functional, tail, tolerance, kernel, out,
            summary, only
        )
    }

    /// Fills unset fields from `defaults`.
    pub fn with_defaults(self, defaults: Settings) -> Settings {
        defaults.overlay(self)
    }

    pub fn law(&self) -> Result<DisorderLaw> {
        let spec = self.law.clone().unwrap_or(LawSpec::Name("gaussian".into()));
        DisorderLaw::try_from(spec).map_err(|e| Error::Config(format!("field `law`: {e}")))
    }

    pub fn d(&self) -> Result<usize> {
        let d = self.d.unwrap_or(1);
        if !(1..=3).contains(&d) {
            return Err(Error::Config(format!("field `d`: must be 1, 2 or 3, got {d}")));
        }
        Ok(d)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn replicas(&self) -> Result<usize> {
        match self.replicas {
            Some(r) if r >= 2 => Ok(r),
            Some(r) => Err(Error::Config(format!("field `replicas`: need at least 2, got {r}"))),
            None => Err(missing("replicas")),
        }
    }

    pub fn one<T: Copy>(list: &Option<Vec<T>>, name: &str) -> Result<T> {
        match list.as_deref() {
            Some([x]) => Ok(*x),
            Some([]) | None => Err(missing(name)),
            Some(_) => Err(Error::Config(format!("field `{name}`: expected a single value"))),
        }
    }

    pub fn list<'a, T>(list: &'a Option<Vec<T>>, name: &str) -> Result<&'a [T]> {
        match list.as_deref() {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(missing(name)),
        }
    }
}

fn missing(name: &str) -> Error {
    Error::Config(format!("field `{name}`: missing"))
}
