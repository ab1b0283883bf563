use std::collections::BTreeSet;
use std::path::Path;

use padelic::residue::DEFAULT_BUDGET;
use padelic::{Prime, Rational};
use serde::{Deserialize, Serialize};

pub const BUDGET_ENV: &str = "PADELIC_ORACLE_BUDGET";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    #[default]
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Config {
    pub truncation_order: usize,
    pub prime_set: Vec<u64>,
    #[serde(with = "padelic::rational::serde_rational")]
    pub h: Rational,
    pub float_tolerance: f64,
    pub oracle_budget: u64,
    pub random_seed: u64,
    pub output_format: OutputFormat,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            truncation_order: 32,
            prime_set: vec![2, 3, 5, 7],
            h: Rational::from_integer(1.into()),
            float_tolerance: 1e-9,
            oracle_budget: DEFAULT_BUDGET,
            random_seed: 42,
            output_format: OutputFormat::Json,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", p.display()))?
            }
            None => Config::default(),
        };
        if let Ok(b) = std::env::var(BUDGET_ENV) {
            config.oracle_budget = b
                .trim()
                .parse()
                .map_err(|_| format!("{BUDGET_ENV} must be a positive integer, got `{b}`"))?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.float_tolerance > 0.0) {
            return Err("floatTolerance must be positive".into());
        }
        if self.oracle_budget == 0 {
            return Err("oracleBudget must be positive".into());
        }
        if self.truncation_order < 4 {
            return Err("truncationOrder must be at least 4".into());
        }
        if self.h <= Rational::from_integer(0.into()) {
            return Err("h must be positive".into());
        }
        let distinct: BTreeSet<_> = self.prime_set.iter().collect();
        if distinct.len() != self.prime_set.len() {
            return Err("primeSet has repeated entries".into());
        }
        self.primes().map(|_| ())
    }

    pub fn primes(&self) -> Result<Vec<Prime>, String> {
        self.prime_set
            .iter()
            .map(|&p| Prime::new(p).map_err(|e| e.to_string()))
            .collect()
    }
}
