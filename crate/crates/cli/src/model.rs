//! Model registry: the string form accepted by `--model` and its resolution.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bmps_core::chain::ChainModel;
use bmps_core::channel::ChannelSpec;
use bmps_core::models;
use bmps_core::stabilizer::{builtin, StabilizerIsometry};
use bmps_core::tensor::{haar_unitary, ComplexMatrix};
use bmps_core::{Caps, LabError, Result};

/// Choice of the single-qubit unitary in the twirl model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Unitary {
    Identity,
    Haar(u64),
    Matrix(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StabilizerSource {
    Builtin(String),
    File(PathBuf),
    /// `K`, `B` qubits, `E` qubits, seed.
    Random(usize, usize, usize, u64),
}

/// What `--model` names.
///
/// ```text
/// paulitwirl:identity | paulitwirl:haar[:SEED] | paulitwirl:matrix:FILE
/// product_trivial
/// identity_to_b:D
/// random:D:DB:DE[:SEED]
/// stabilizer:NAME | stabilizer:file:FILE | stabilizer:random:K:NB:NE[:SEED]
/// custom:FILE
/// ```
///
/// A missing seed is filled from `--seed` when the spec is parsed, so the
/// canonical form printed in reports always carries it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelSpec {
    PauliTwirl(Unitary),
    ProductTrivial,
    IdentityToB(usize),
    Random {
        d: usize,
        b: usize,
        e: usize,
        seed: u64,
    },
    Stabilizer(StabilizerSource),
    Custom(PathBuf),
}

/// A resolved model: the dense site isometry, plus the exact Clifford form
/// when one exists.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub chain: ChainModel,
    pub clifford: Option<StabilizerIsometry>,
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::InvalidArgument(msg.into())
}

fn number<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| bad(format!("`{s}` is not a valid {what}")))
}

impl ModelSpec {
    /// Parses the `--model` string; `seed` fills in omitted seeds.
    pub fn parse(s: &str, seed: u64) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let seed_at = |i: usize| -> Result<u64> {
            match parts.get(i) {
                Some(p) => number(p, "seed"),
                None => Ok(seed),
            }
        };
        let rest = |i: usize| parts[i..].join(":");
        let spec = match parts.as_slice() {
            ["paulitwirl", "identity"] => ModelSpec::PauliTwirl(Unitary::Identity),
            ["paulitwirl", "haar"] | ["paulitwirl", "haar", _] => {
                ModelSpec::PauliTwirl(Unitary::Haar(seed_at(2)?))
            }
            ["paulitwirl", "matrix", _, ..] => {
                ModelSpec::PauliTwirl(Unitary::Matrix(PathBuf::from(rest(2))))
            }
            ["product_trivial"] => ModelSpec::ProductTrivial,
            ["identity_to_b", d] => ModelSpec::IdentityToB(number(d, "bond dimension")?),
            ["random", d, b, e] | ["random", d, b, e, _] => ModelSpec::Random {
                d: number(d, "bond dimension")?,
                b: number(b, "B dimension")?,
                e: number(e, "E dimension")?,
                seed: seed_at(4)?,
            },
            ["stabilizer", "file", _, ..] => {
                ModelSpec::Stabilizer(StabilizerSource::File(PathBuf::from(rest(2))))
            }
            ["stabilizer", "random", k, nb, ne] | ["stabilizer", "random", k, nb, ne, _] => {
                ModelSpec::Stabilizer(StabilizerSource::Random(
                    number(k, "K")?,
                    number(nb, "B qubit count")?,
                    number(ne, "E qubit count")?,
                    seed_at(5)?,
                ))
            }
            ["stabilizer", name] => ModelSpec::Stabilizer(StabilizerSource::Builtin(name.to_string())),
            ["custom", _, ..] => ModelSpec::Custom(PathBuf::from(rest(1))),
            _ => {
                return Err(bad(format!(
                    "unknown model `{s}`; expected one of paulitwirl:identity, paulitwirl:haar[:SEED], \
                     paulitwirl:matrix:FILE, product_trivial, identity_to_b:D, random:D:DB:DE[:SEED], \
                     stabilizer:NAME, stabilizer:file:FILE, stabilizer:random:K:NB:NE[:SEED], custom:FILE"
                )))
            }
        };
        Ok(spec)
    }

    /// The seed the model depends on, if any.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ModelSpec::PauliTwirl(Unitary::Haar(s)) => Some(*s),
            ModelSpec::Random { seed, .. } => Some(*seed),
            ModelSpec::Stabilizer(StabilizerSource::Random(_, _, _, s)) => Some(*s),
            _ => None,
        }
    }

    /// The same model with another seed; unseeded models are unchanged.
    pub fn with_seed(&self, seed: u64) -> ModelSpec {
        match self {
            ModelSpec::PauliTwirl(Unitary::Haar(_)) => ModelSpec::PauliTwirl(Unitary::Haar(seed)),
            ModelSpec::Random { d, b, e, .. } => ModelSpec::Random {
                d: *d,
                b: *b,
                e: *e,
                seed,
            },
            ModelSpec::Stabilizer(StabilizerSource::Random(k, nb, ne, _)) => {
                ModelSpec::Stabilizer(StabilizerSource::Random(*k, *nb, *ne, seed))
            }
            other => other.clone(),
        }
    }

    pub fn resolve(&self, caps: Caps) -> Result<Resolved> {
        let chain = |m: ChainModel| m.with_caps(caps);
        match self {
            ModelSpec::PauliTwirl(u) => {
                let matrix = match u {
                    Unitary::Identity => ComplexMatrix::identity(2),
                    Unitary::Haar(seed) => haar_unitary(2, *seed)?,
                    Unitary::Matrix(path) => {
                        let text = read(path)?;
                        serde_json::from_str(&text).map_err(|e| json_error(path, &e))?
                    }
                };
                Ok(Resolved {
                    chain: chain(models::paulitwirl(&matrix)?),
                    clifford: (*u == Unitary::Identity).then(|| builtin("twirl")).transpose()?,
                })
            }
            ModelSpec::ProductTrivial => Ok(Resolved {
                chain: chain(models::product_trivial()?),
                clifford: None,
            }),
            ModelSpec::IdentityToB(d) => Ok(Resolved {
                chain: chain(models::identity_to_b(*d)?),
                clifford: (*d == 2).then(|| builtin("identity")).transpose()?,
            }),
            ModelSpec::Random { d, b, e, seed } => Ok(Resolved {
                chain: chain(models::random_isometry(*d, *b, *e, *seed)?),
                clifford: None,
            }),
            ModelSpec::Stabilizer(src) => {
                let v = self.clifford_of(src)?;
                Ok(Resolved {
                    chain: v.to_chain_model(caps)?,
                    clifford: Some(v),
                })
            }
            ModelSpec::Custom(path) => {
                let text = read(path)?;
                let spec: ChannelSpec =
                    serde_json::from_str(&text).map_err(|e| json_error(path, &e))?;
                let p = spec.to_isometry()?;
                Ok(Resolved {
                    chain: ChainModel::new(p.isometry, &p.b_labels, &p.e_labels, caps)?,
                    clifford: None,
                })
            }
        }
    }

    /// The Clifford encoder alone, without building its dense form.
    pub fn clifford(&self) -> Result<StabilizerIsometry> {
        match self {
            ModelSpec::Stabilizer(src) => self.clifford_of(src),
            ModelSpec::PauliTwirl(Unitary::Identity) => builtin("twirl"),
            ModelSpec::IdentityToB(2) => builtin("identity"),
            other => Err(bad(format!("`{other}` is not a Clifford model"))),
        }
    }

    fn clifford_of(&self, src: &StabilizerSource) -> Result<StabilizerIsometry> {
        match src {
            StabilizerSource::Builtin(name) => builtin(name),
            StabilizerSource::File(path) => StabilizerIsometry::parse_tableau(&read(path)?),
            StabilizerSource::Random(k, nb, ne, seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                StabilizerIsometry::random(*k, *nb, *ne, &mut rng)
            }
        }
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))
}

fn json_error(path: &PathBuf, e: &serde_json::Error) -> LabError {
    LabError::Parse {
        line: e.line(),
        column: e.column(),
        message: format!("{}: {e}", path.display()),
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::PauliTwirl(Unitary::Identity) => write!(f, "paulitwirl:identity"),
            ModelSpec::PauliTwirl(Unitary::Haar(s)) => write!(f, "paulitwirl:haar:{s}"),
            ModelSpec::PauliTwirl(Unitary::Matrix(p)) => write!(f, "paulitwirl:matrix:{}", p.display()),
            ModelSpec::ProductTrivial => write!(f, "product_trivial"),
            ModelSpec::IdentityToB(d) => write!(f, "identity_to_b:{d}"),
            ModelSpec::Random { d, b, e, seed } => write!(f, "random:{d}:{b}:{e}:{seed}"),
            ModelSpec::Stabilizer(StabilizerSource::Builtin(n)) => write!(f, "stabilizer:{n}"),
            ModelSpec::Stabilizer(StabilizerSource::File(p)) => write!(f, "stabilizer:file:{}", p.display()),
            ModelSpec::Stabilizer(StabilizerSource::Random(k, nb, ne, s)) => {
                write!(f, "stabilizer:random:{k}:{nb}:{ne}:{s}")
            }
            ModelSpec::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}
