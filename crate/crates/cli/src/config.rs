use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use entperc::lattice::Coord;

use crate::error::CliError;

/// Keys a config file may set. Dashes and underscores are interchangeable.
const KEYS: &[&str] = &[
    "seed",
    "threads",
    "out",
    "no-timestamp",
    "lattice",
    "p",
    "p2",
    "L",
    "n",
    "boundary",
    "no-translations",
    "nodes",
    "a",
    "a-prime",
    "tolerance",
    "order",
    "published",
    "grid",
    "crossover",
    "crossover-n",
    "resolution",
];

/// Flag values preset by a TOML file.
#[derive(Debug, Default)]
pub struct FileConfig {
    table: toml::Table,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        let mut table = toml::Table::new();
        for (k, v) in raw {
            let key = k.replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("unknown key `{k}`"));
            }
            table.insert(key, v);
        }
        Ok(FileConfig { table })
    }

    fn text(&self, key: &str) -> Result<Option<String>, CliError> {
        let Some(v) = self.table.get(key) else { return Ok(None) };
        let s = match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            toml::Value::Array(items) => {
                let parts: Result<Vec<String>, CliError> = items
                    .iter()
                    .map(|x| match x {
                        toml::Value::Integer(i) => Ok(i.to_string()),
                        toml::Value::Float(f) => Ok(f.to_string()),
                        toml::Value::String(s) => Ok(s.clone()),
                        _ => Err(CliError::Config(format!("config key `{key}`: unsupported array item"))),
                    })
                    .collect();
                let sep = if key == "nodes" { ";" } else { "," };
                parts?.join(sep)
            }
            _ => return Err(CliError::Config(format!("config key `{key}`: unsupported value"))),
        };
        Ok(Some(s))
    }

    /// The command-line value if given, otherwise the file's.
    pub fn pick<T>(&self, cli: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.text(key)? {
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| CliError::Config(format!("config key `{key}`: {e}"))),
            None => Ok(None),
        }
    }

    /// A switch is on when given on the command line or set true in the file.
    pub fn switch(&self, cli: bool, key: &str) -> Result<bool, CliError> {
        Ok(cli || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

/// Comma-separated list of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let xs: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
        match xs {
            Ok(v) if !v.is_empty() => Ok(List(v)),
            _ => Err(format!("expected comma-separated numbers, got `{s}`")),
        }
    }
}

/// A lattice coordinate written `x,y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node(pub Coord);

impl FromStr for Node {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected a coordinate `x,y`, got `{s}`");
        let (x, y) = s.split_once(',').ok_or_else(bad)?;
        Ok(Node((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?)))
    }
}

/// Coordinates separated by `;`, as in `0,0;1,1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nodes(pub Vec<Coord>);

impl FromStr for Nodes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Result<Vec<Coord>, String> = s.split(';').map(|t| t.parse::<Node>().map(|n| n.0)).collect();
        Ok(Nodes(v?))
    }
}
