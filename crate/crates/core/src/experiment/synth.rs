//! Synthetic datasets for smoke tests and dry runs.
//!
//! Every generator writes CSV files, a dataset manifest (`dataset.json`) and a
//! single-split experiment manifest (`experiment.json`) into one directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::json;

use crate::dataset::{DatasetManifest, LayoutKind, DEFAULT_REGION_ORDER};
use crate::error::{Error, Result};
use crate::seed::{self, stream, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    /// Two uniform features, label `x0 > x1`.
    Separable,
    /// One channel of ten uniform steps, label `sum > 5`.
    SequenceSum,
    /// 110 subjects (102 PD, 8 HC), four regions of 210 noise values.
    CohortShape,
    /// 120 samples (102 / 18) where one feature equals the label.
    LabelFeature,
}

impl SynthKind {
    pub const ALL: [SynthKind; 4] = [
        SynthKind::Separable,
        SynthKind::SequenceSum,
        SynthKind::CohortShape,
        SynthKind::LabelFeature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Separable => "separable",
            SynthKind::SequenceSum => "sequence-sum",
            SynthKind::CohortShape => "cohort-shape",
            SynthKind::LabelFeature => "label-feature",
        }
    }

    fn tag(self) -> u64 {
        self as u64
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown synthetic dataset {s:?}")))
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(features: &[String]) -> Table {
        let mut header = vec!["id".to_string(), "group".to_string()];
        header.extend(features.iter().cloned());
        Table {
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, id: usize, group: &str, values: &[f64]) {
        let mut row = vec![format!("s{id:03}"), group.to_string()];
        row.extend(values.iter().map(|v| v.to_string()));
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
        w.write_record(&self.header).map_err(|e| csv_io(path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| csv_io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn uniform(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| seed::unit(rng)).collect()
}

// Label order with `minority` class-0 samples spread through the file.
fn labels(total: usize, minority: usize, rng: &mut Rng) -> Vec<u8> {
    let mut l = vec![1u8; total];
    l[..minority].fill(0);
    seed::shuffle(rng, &mut l);
    l
}

fn class_map(negative: &str, positive: &str) -> BTreeMap<String, u8> {
    BTreeMap::from([(negative.to_string(), 0), (positive.to_string(), 1)])
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn dataset_manifest(
    layout: LayoutKind,
    files: Vec<PathBuf>,
    map: BTreeMap<String, u8>,
    regions: Vec<String>,
) -> DatasetManifest {
    DatasetManifest {
        layout,
        files,
        label_column: "group".into(),
        class_map: map,
        region_order: regions,
        id_column: Some("id".into()),
    }
}

/// Writes the `kind` dataset into `dir` and returns the files created.
pub fn write_synthetic(kind: SynthKind, dir: &Path, master_seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rng = seed::derived_rng(master_seed, &[stream::SYNTH, kind.tag()]);
    let mut written = Vec::new();
    let emit_table = |name: &str, table: &Table| -> Result<PathBuf> {
        let path = dir.join(name);
        table.write(&path)?;
        Ok(path)
    };

    let manifest = match kind {
        SynthKind::Separable => {
            let mut t = Table::new(&names("x", 2));
            for i in 0..100 {
                let x = uniform(&mut rng, 2);
                t.push(i, if x[0] > x[1] { "pos" } else { "neg" }, &x);
            }
            written.push(emit_table("data.csv", &t)?);
            dataset_manifest(
                LayoutKind::Flat,
                vec!["data.csv".into()],
                class_map("neg", "pos"),
                vec![],
            )
        }
        SynthKind::SequenceSum => {
            let mut t = Table::new(&names("t", 10));
            for i in 0..200 {
                let x = uniform(&mut rng, 10);
                let sum: f64 = x.iter().sum();
                t.push(i, if sum > 5.0 { "pos" } else { "neg" }, &x);
            }
            written.push(emit_table("signal.csv", &t)?);
            dataset_manifest(
                LayoutKind::Sequential,
                vec!["signal.csv".into()],
                class_map("neg", "pos"),
                vec!["signal".into()],
            )
        }
        SynthKind::CohortShape => {
            let groups = labels(110, 8, &mut rng);
            let regions: Vec<String> = DEFAULT_REGION_ORDER.iter().map(|r| r.to_string()).collect();
            let mut files = Vec::new();
            for region in &regions {
                let mut t = Table::new(&names("t", 210));
                for (i, &g) in groups.iter().enumerate() {
                    let x: Vec<f64> = uniform(&mut rng, 210)
                        .iter()
                        .map(|v| 2.0 * v - 1.0)
                        .collect();
                    t.push(i, if g == 1 { "PD" } else { "HC" }, &x);
                }
                let name = format!("region_{region}.csv");
                written.push(emit_table(&name, &t)?);
                files.push(PathBuf::from(name));
            }
            // One region alone, the first of the three dataset variants.
            let single = dataset_manifest(
                LayoutKind::Flat,
                vec![files[0].clone()],
                class_map("HC", "PD"),
                vec![],
            );
            let concat = dataset_manifest(
                LayoutKind::Flat,
                files.clone(),
                class_map("HC", "PD"),
                regions.clone(),
            );
            let seq = dataset_manifest(
                LayoutKind::Sequential,
                files,
                class_map("HC", "PD"),
                regions,
            );
            for (name, m) in [
                ("dataset_concat.json", &concat),
                ("dataset_sequential.json", &seq),
            ] {
                let path = dir.join(name);
                write_json(&path, m)?;
                written.push(path);
            }
            single
        }
        SynthKind::LabelFeature => {
            let groups = labels(120, 18, &mut rng);
            let mut features = vec!["label_copy".to_string()];
            features.extend(names("noise", 3));
            let mut t = Table::new(&features);
            for (i, &g) in groups.iter().enumerate() {
                let mut x = vec![f64::from(g)];
                x.extend(uniform(&mut rng, 3));
                t.push(i, if g == 1 { "pos" } else { "neg" }, &x);
            }
            written.push(emit_table("data.csv", &t)?);
            dataset_manifest(
                LayoutKind::Flat,
                vec!["data.csv".into()],
                class_map("neg", "pos"),
                vec![],
            )
        }
    };

    let path = dir.join("dataset.json");
    write_json(&path, &manifest)?;
    written.push(path);

    let experiment = json!({
        "dataset": "dataset.json",
        "mode": "single_split",
        "single_split": { "fractions": { "train": 0.7, "validation": 0.15, "test": 0.15 } },
        "runs": 10,
        "master_seed": master_seed,
        "output_dir": "out",
    });
    let path = dir.join("experiment.json");
    write_json(&path, &experiment)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::load_manifest;

    #[test]
    fn every_kind_loads() {
        let tmp = tempfile::tempdir().unwrap();
        for kind in SynthKind::ALL {
            let dir = tmp.path().join(kind.name());
            write_synthetic(kind, &dir, 3).unwrap();
            let d = load_manifest(&dir.join("dataset.json")).unwrap();
            match kind {
                SynthKind::Separable => assert_eq!(d.len(), 100),
                SynthKind::SequenceSum => {
                    assert!(d.layout().is_sequential());
                    assert_eq!(d.layout().len(), 10);
                }
                SynthKind::CohortShape => {
                    assert_eq!(d.class_counts(), [8, 102]);
                    assert_eq!(d.layout().len(), 210);
                    let c = load_manifest(&dir.join("dataset_concat.json")).unwrap();
                    assert_eq!(c.layout().len(), 840);
                    let s = load_manifest(&dir.join("dataset_sequential.json")).unwrap();
                    assert_eq!(s.layout().n_inputs(), 4);
                }
                SynthKind::LabelFeature => assert_eq!(d.class_counts(), [18, 102]),
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let tmp = tempfile::tempdir().unwrap();
        write_synthetic(SynthKind::Separable, &tmp.path().join("a"), 7).unwrap();
        write_synthetic(SynthKind::Separable, &tmp.path().join("b"), 7).unwrap();
        let a = std::fs::read(tmp.path().join("a/data.csv")).unwrap();
        let b = std::fs::read(tmp.path().join("b/data.csv")).unwrap();
        assert_eq!(a, b);
        assert!("bogus".parse::<SynthKind>().is_err());
    }
}
