//! Learner checkpoint files.
//!
//! ```text
//! b"GVFC"            magic
//! u32                format version (1)
//! u32                header length in bytes
//! header             UTF-8 lines "key=value":
//!                      algorithm=greedy_gq|offpac
//!                      samples=<u64>
//!                      hp.<name>=<real, 17 significant digits>
//!                      vectors=<name>,<name>,...
//! vectors            one weight-vector block (see `weights_io`) per name, in order
//! ```
//!
//! Integers are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{contract, GvfError, Result};
use crate::sparse::DenseWeightVector;
use crate::weights_io;

const MAGIC: &[u8; 4] = b"GVFC";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    GreedyGq,
    OffPac,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::GreedyGq => "greedy_gq",
            Algorithm::OffPac => "offpac",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "greedy_gq" => Ok(Algorithm::GreedyGq),
            "offpac" => Ok(Algorithm::OffPac),
            other => Err(contract(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub algorithm: Algorithm,
    pub sample_count: u64,
    pub hyperparameters: Vec<(String, f64)>,
    pub vectors: Vec<(String, DenseWeightVector)>,
}

impl Checkpoint {
    pub fn hyperparameter(&self, name: &str) -> Result<f64> {
        self.hyperparameters
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| GvfError::Format(format!("missing hyperparameter {name}")))
    }

    pub fn vector(&self, name: &str) -> Result<&DenseWeightVector> {
        self.vectors
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v)
            .ok_or_else(|| GvfError::Format(format!("missing vector {name}")))
    }

    pub fn expect_algorithm(&self, algorithm: Algorithm) -> Result<()> {
        if self.algorithm == algorithm {
            Ok(())
        } else {
            Err(contract(format!(
                "checkpoint holds {}, expected {}",
                self.algorithm.as_str(),
                algorithm.as_str()
            )))
        }
    }

    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut header = format!(
            "algorithm={}\nsamples={}\n",
            self.algorithm.as_str(),
            self.sample_count
        );
        for (k, v) in &self.hyperparameters {
            header.push_str(&format!("hp.{k}={v:.16e}\n"));
        }
        let names: Vec<&str> = self.vectors.iter().map(|(k, _)| k.as_str()).collect();
        header.push_str(&format!("vectors={}\n", names.join(",")));

        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(header.len() as u32).to_le_bytes())?;
        out.write_all(header.as_bytes())?;
        for (_, v) in &self.vectors {
            weights_io::write_auto(out, v)?;
        }
        Ok(())
    }

    pub fn read<R: Read>(input: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(GvfError::Format("not a checkpoint file".into()));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != VERSION {
            return Err(GvfError::Format(format!("unsupported checkpoint version {version}")));
        }
        input.read_exact(&mut word)?;
        let mut header = vec![0u8; u32::from_le_bytes(word) as usize];
        input.read_exact(&mut header)?;
        let header = String::from_utf8(header).map_err(|e| GvfError::Format(e.to_string()))?;

        let mut algorithm = None;
        let mut sample_count = None;
        let mut hyperparameters = Vec::new();
        let mut names = Vec::new();
        for line in header.lines() {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GvfError::Format(format!("bad header line {line:?}")))?;
            let bad = |e: String| GvfError::Format(format!("{key}: {e}"));
            match key {
                "algorithm" => algorithm = Some(Algorithm::parse(value)?),
                "samples" => sample_count = Some(value.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                "vectors" => names = value.split(',').filter(|s| !s.is_empty()).map(String::from).collect(),
                _ => match key.strip_prefix("hp.") {
                    Some(name) => hyperparameters
                        .push((name.to_string(), value.parse::<f64>().map_err(|e| bad(e.to_string()))?)),
                    None => return Err(bad("unknown key".into())),
                },
            }
        }
        let vectors = names
            .into_iter()
            .map(|name| Ok((name, weights_io::read(input)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            algorithm: algorithm.ok_or_else(|| GvfError::Format("missing algorithm".into()))?,
            sample_count: sample_count.ok_or_else(|| GvfError::Format("missing samples".into()))?,
            hyperparameters,
            vectors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(&mut BufReader::new(File::open(path)?))
    }
}
