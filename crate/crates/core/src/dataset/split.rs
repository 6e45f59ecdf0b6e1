use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FunctionalDataset;
use crate::error::{Error, Result};

/// Train/test partition with explicitly configured outliers.
///
/// Outliers are dropped from the training output. They are usually also
/// listed in `train` (the source partition names them there), but may not
/// overlap either test list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train: Vec<usize>,
    pub test1: Vec<usize>,
    pub test2: Vec<usize>,
    #[serde(default)]
    pub outliers: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SplitDatasets {
    pub train: FunctionalDataset,
    pub test1: FunctionalDataset,
    pub test2: FunctionalDataset,
}

impl SplitSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("split spec: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let lists = [
            ("train", &self.train),
            ("test1", &self.test1),
            ("test2", &self.test2),
            ("outliers", &self.outliers),
        ];
        let mut sets = Vec::with_capacity(4);
        for (name, list) in lists {
            let mut set = BTreeSet::new();
            for &i in list.iter() {
                if i >= n {
                    return Err(Error::Validation(format!(
                        "{name} index {i} out of bounds for {n} samples"
                    )));
                }
                if !set.insert(i) {
                    return Err(Error::Validation(format!("{name} lists index {i} twice")));
                }
            }
            sets.push((name, set));
        }
        // train/outliers may overlap; every other pair must be disjoint
        for a in 0..4 {
            for b in (a + 1)..4 {
                if a == 0 && b == 3 {
                    continue;
                }
                if let Some(i) = sets[a].1.intersection(&sets[b].1).next() {
                    return Err(Error::Validation(format!(
                        "index {i} appears in both {} and {}",
                        sets[a].0, sets[b].0
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn apply_split(ds: &FunctionalDataset, spec: &SplitSpec) -> Result<SplitDatasets> {
    spec.validate(ds.n())?;
    let outliers: BTreeSet<usize> = spec.outliers.iter().copied().collect();
    let train: Vec<usize> = spec
        .train
        .iter()
        .copied()
        .filter(|i| !outliers.contains(i))
        .collect();
    Ok(SplitDatasets {
        train: ds.select_rows(&train)?,
        test1: ds.select_rows(&spec.test1)?,
        test2: ds.select_rows(&spec.test2)?,
    })
}
