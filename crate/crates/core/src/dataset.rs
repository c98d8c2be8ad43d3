//! Labeled feature data: CSV ingestion, region layouts and stratified splits.
//!
//! Features are stored row-major. A flat sample is a single row of
//! `n_features` values; a sequential sample is `n_timesteps` rows of
//! `n_channels` values each.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Region order used when a manifest does not name its regions.
pub const DEFAULT_REGION_ORDER: [&str; 4] = ["PCC", "mPFC", "RIPC", "LIPC"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layout {
    Flat {
        n_features: usize,
    },
    Sequential {
        n_channels: usize,
        n_timesteps: usize,
    },
}

impl Layout {
    /// Number of stored values per sample.
    pub fn len(&self) -> usize {
        match *self {
            Layout::Flat { n_features } => n_features,
            Layout::Sequential {
                n_channels,
                n_timesteps,
            } => n_channels * n_timesteps,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Width of one evaluation step, i.e. the program input count.
    pub fn n_inputs(&self) -> usize {
        match *self {
            Layout::Flat { n_features } => n_features,
            Layout::Sequential { n_channels, .. } => n_channels,
        }
    }

    pub fn is_sequential(&self) -> bool {
        matches!(self, Layout::Sequential { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub features: Vec<f64>,
    pub label: u8,
    pub synthetic: bool,
}

impl Sample {
    pub fn new(id: impl Into<String>, features: Vec<f64>, label: u8) -> Self {
        Sample {
            id: id.into(),
            features,
            label,
            synthetic: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    layout: Layout,
    samples: Vec<Sample>,
    input_names: Vec<String>,
    class_counts: [usize; 2],
}

impl Dataset {
    /// Builds a dataset, checking every sample against the layout.
    pub fn new(layout: Layout, samples: Vec<Sample>) -> Result<Self> {
        let names = (0..layout.n_inputs()).map(|i| format!("x{i}")).collect();
        Self::with_input_names(layout, samples, names)
    }

    pub fn with_input_names(
        layout: Layout,
        samples: Vec<Sample>,
        input_names: Vec<String>,
    ) -> Result<Self> {
        if layout.n_inputs() == 0 {
            return Err(Error::Config("layout must have at least one input".into()));
        }
        if input_names.len() != layout.n_inputs() {
            return Err(Error::Config(format!(
                "{} input names for {} inputs",
                input_names.len(),
                layout.n_inputs()
            )));
        }
        let mut class_counts = [0usize; 2];
        for s in &samples {
            if s.features.len() != layout.len() {
                return Err(Error::Consistency(format!(
                    "sample {:?} has {} values, layout needs {}",
                    s.id,
                    s.features.len(),
                    layout.len()
                )));
            }
            if s.label > 1 {
                return Err(Error::Consistency(format!(
                    "sample {:?} has label {}",
                    s.id, s.label
                )));
            }
            class_counts[s.label as usize] += 1;
        }
        Ok(Dataset {
            layout,
            samples,
            input_names,
            class_counts,
        })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Per-class sample counts, indexed by label.
    pub fn class_counts(&self) -> [usize; 2] {
        self.class_counts
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Clones the samples at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Vec<Sample> {
        indices.iter().map(|&i| self.samples[i].clone()).collect()
    }

    /// Indices of each class, in sample order.
    pub fn class_indices(&self) -> [Vec<usize>; 2] {
        let mut out = [Vec::new(), Vec::new()];
        for (i, s) in self.samples.iter().enumerate() {
            out[s.label as usize].push(i);
        }
        out
    }
}

/// How to read one CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: String,
    pub class_map: BTreeMap<String, u8>,
    /// Column holding the sample id. Without one, ids are the 1-based row
    /// numbers, which only line up across region files if those files list
    /// participants in the same order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_column: Option<String>,
}

impl CsvSchema {
    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 2];
        for (name, &class) in &self.class_map {
            if class > 1 {
                return Err(Error::Config(format!(
                    "class_map entry {name:?} maps to {class}; only 0 and 1 are allowed"
                )));
            }
            seen[class as usize] = true;
        }
        if self.class_map.len() != 2 || !seen[0] || !seen[1] {
            return Err(Error::Config(
                "class_map must map exactly two label values, one to 0 and one to 1".into(),
            ));
        }
        Ok(())
    }
}

/// Reads a flat dataset. Every column other than the label (and id) column is
/// a feature, kept in file order.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;

    let header = reader.headers().map_err(|e| csv_error(path, 0, e))?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let label_col = find(&schema.label_column).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        row: 0,
        message: format!("no label column {:?}", schema.label_column),
    })?;
    let id_col = match &schema.id_column {
        Some(name) => Some(find(name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row: 0,
            message: format!("no id column {name:?}"),
        })?),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&c| c != label_col && Some(c) != id_col)
        .collect();
    let names: Vec<String> = feature_cols
        .iter()
        .map(|&c| header[c].to_string())
        .collect();

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                message: format!("{} columns, header has {}", record.len(), header.len()),
            });
        }
        let raw_label = &record[label_col];
        let label = *schema
            .class_map
            .get(raw_label)
            .ok_or_else(|| Error::Label {
                path: path.to_path_buf(),
                row,
                value: raw_label.to_string(),
            })?;
        let mut features = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let cell = &record[c];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row,
                message: format!("column {:?}: {cell:?} is not a number", &header[c]),
            })?;
            features.push(v);
        }
        let id = match id_col {
            Some(c) => record[c].to_string(),
            None => row.to_string(),
        };
        samples.push(Sample::new(id, features, label));
    }

    if feature_cols.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 0,
            message: "no feature columns".into(),
        });
    }
    Dataset::with_input_names(
        Layout::Flat {
            n_features: feature_cols.len(),
        },
        samples,
        names,
    )
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            row,
            message: format!("{other:?}"),
        },
    }
}

/// Aligns region datasets on sample id. Returns, per sample of the first
/// region, the matching sample index in every region.
fn align_regions(regions: &[Dataset]) -> Result<(usize, Vec<Vec<usize>>)> {
    let first = regions
        .first()
        .ok_or_else(|| Error::Assembly("no region datasets".into()))?;
    let width = match first.layout() {
        Layout::Flat { n_features } => n_features,
        Layout::Sequential { .. } => {
            return Err(Error::Assembly("region datasets must be flat".into()))
        }
    };
    let mut lookups = Vec::with_capacity(regions.len());
    for (r, region) in regions.iter().enumerate() {
        if region.layout() != first.layout() {
            return Err(Error::Assembly(format!(
                "region {r} has layout {:?}, region 0 has {:?}",
                region.layout(),
                first.layout()
            )));
        }
        if region.len() != first.len() {
            return Err(Error::Assembly(format!(
                "region {r} has {} samples, region 0 has {}",
                region.len(),
                first.len()
            )));
        }
        let mut by_id = HashMap::with_capacity(region.len());
        for (i, s) in region.samples().iter().enumerate() {
            if by_id.insert(s.id.as_str(), i).is_some() {
                return Err(Error::Assembly(format!(
                    "region {r} repeats sample id {:?}",
                    s.id
                )));
            }
        }
        lookups.push(by_id);
    }

    let mut rows = Vec::with_capacity(first.len());
    for s in first.samples() {
        let mut row = Vec::with_capacity(regions.len());
        for (r, by_id) in lookups.iter().enumerate() {
            let &i = by_id.get(s.id.as_str()).ok_or_else(|| {
                Error::Assembly(format!("sample id {:?} missing from region {r}", s.id))
            })?;
            let other = &regions[r].samples()[i];
            if other.label != s.label {
                return Err(Error::Consistency(format!(
                    "sample {:?} is labelled {} in region 0 but {} in region {r}",
                    s.id, s.label, other.label
                )));
            }
            row.push(i);
        }
        rows.push(row);
    }
    Ok((width, rows))
}

fn region_names(regions: &[Dataset], names: &[String]) -> Result<Vec<String>> {
    if names.is_empty() {
        return Ok((0..regions.len())
            .map(|r| {
                DEFAULT_REGION_ORDER
                    .get(r)
                    .map_or_else(|| format!("region{r}"), |s| s.to_string())
            })
            .collect());
    }
    if names.len() != regions.len() {
        return Err(Error::Config(format!(
            "{} region names for {} region files",
            names.len(),
            regions.len()
        )));
    }
    Ok(names.to_vec())
}

/// Stacks region datasets into one sequential dataset: channel `r` of every
/// timestep comes from `regions[r]`.
pub fn assemble_sequential(regions: &[Dataset], names: &[String]) -> Result<Dataset> {
    let (steps, rows) = align_regions(regions)?;
    let names = region_names(regions, names)?;
    let channels = regions.len();
    let samples = regions[0]
        .samples()
        .iter()
        .zip(&rows)
        .map(|(s, row)| {
            let mut features = vec![0.0; steps * channels];
            for (c, &i) in row.iter().enumerate() {
                for (t, &v) in regions[c].samples()[i].features.iter().enumerate() {
                    features[t * channels + c] = v;
                }
            }
            Sample::new(s.id.clone(), features, s.label)
        })
        .collect();
    Dataset::with_input_names(
        Layout::Sequential {
            n_channels: channels,
            n_timesteps: steps,
        },
        samples,
        names,
    )
}

/// Concatenates region vectors end to end in the given region order.
pub fn concat_flat(regions: &[Dataset], names: &[String]) -> Result<Dataset> {
    let (width, rows) = align_regions(regions)?;
    let names = region_names(regions, names)?;
    let samples = regions[0]
        .samples()
        .iter()
        .zip(&rows)
        .map(|(s, row)| {
            let mut features = Vec::with_capacity(width * regions.len());
            for (r, &i) in row.iter().enumerate() {
                features.extend_from_slice(&regions[r].samples()[i].features);
            }
            Sample::new(s.id.clone(), features, s.label)
        })
        .collect();
    let input_names = regions
        .iter()
        .zip(&names)
        .flat_map(|(d, region)| d.input_names().iter().map(move |n| format!("{region}:{n}")))
        .collect();
    Dataset::with_input_names(
        Layout::Flat {
            n_features: width * regions.len(),
        },
        samples,
        input_names,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Fractions {
    pub const SINGLE_SPLIT: Fractions = Fractions {
        train: 0.70,
        validation: 0.15,
        test: 0.15,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.validation, self.test];
        if all.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Config(format!(
                "split fractions must be positive, got {all:?}"
            )));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    /// Per-class (train, validation, test) counts. Test is rounded first,
    /// then validation, half away from zero; train takes the remainder.
    pub fn counts(&self, n: usize) -> (i64, i64, i64) {
        let test = (self.test * n as f64).round() as i64;
        let val = (self.validation * n as f64).round() as i64;
        (n as i64 - val - test, val, test)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified train/validation/test split. Each class is shuffled with the
/// seeded stream and carved into test, validation and train in that order.
/// Index lists come back sorted.
pub fn stratified_split(dataset: &Dataset, fractions: Fractions, seed: u64) -> Result<Split> {
    fractions.validate()?;
    let mut rng = seed::rng_from_seed(seed);
    let mut split = Split {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
    };
    for (class, mut members) in dataset.class_indices().into_iter().enumerate() {
        if members.is_empty() {
            return Err(Error::Split(format!("class {class} has no samples")));
        }
        let (n_train, n_val, n_test) = fractions.counts(members.len());
        if n_train <= 0 {
            return Err(Error::Split(format!(
                "class {class} has {} samples, too few for fractions {:?}",
                members.len(),
                fractions
            )));
        }
        seed::shuffle(&mut rng, &mut members);
        let (test, rest) = members.split_at(n_test as usize);
        let (val, train) = rest.split_at(n_val as usize);
        split.test.extend_from_slice(test);
        split.validation.extend_from_slice(val);
        split.train.extend_from_slice(train);
    }
    split.train.sort_unstable();
    split.validation.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Flat,
    Sequential,
}

/// JSON description of a dataset on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub layout: LayoutKind,
    /// CSV files, relative to the manifest's directory. One file for a plain
    /// flat dataset; one per region otherwise.
    pub files: Vec<PathBuf>,
    pub label_column: String,
    pub class_map: BTreeMap<String, u8>,
    #[serde(default)]
    pub region_order: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_column: Option<String>,
}

impl DatasetManifest {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            label_column: self.label_column.clone(),
            class_map: self.class_map.clone(),
            id_column: self.id_column.clone(),
        }
    }

    /// Loads every file (resolved against `base_dir`) and assembles the
    /// declared layout.
    pub fn load(&self, base_dir: &Path) -> Result<Dataset> {
        if self.files.is_empty() {
            return Err(Error::Config("dataset manifest lists no files".into()));
        }
        let schema = self.schema();
        let regions = self
            .files
            .iter()
            .map(|f| load_csv(&base_dir.join(f), &schema))
            .collect::<Result<Vec<_>>>()?;
        match (self.layout, regions.len()) {
            (LayoutKind::Flat, 1) if self.region_order.is_empty() => {
                Ok(regions.into_iter().next().expect("one region"))
            }
            (LayoutKind::Flat, _) => concat_flat(&regions, &self.region_order),
            (LayoutKind::Sequential, _) => assemble_sequential(&regions, &self.region_order),
        }
    }
}

/// Reads a dataset manifest and the files it names.
pub fn load_manifest(path: &Path) -> Result<Dataset> {
    let manifest = DatasetManifest::from_file(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    manifest.load(base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn flat(rows: &[(&str, Vec<f64>, u8)]) -> Dataset {
        let n = rows.first().map_or(1, |r| r.1.len());
        Dataset::new(
            Layout::Flat { n_features: n },
            rows.iter()
                .map(|(id, f, l)| Sample::new(*id, f.clone(), *l))
                .collect(),
        )
        .unwrap()
    }

    fn counts_dataset(ones: usize, zeros: usize) -> Dataset {
        let samples = (0..ones + zeros)
            .map(|i| Sample::new(i.to_string(), vec![i as f64], u8::from(i < ones)))
            .collect();
        Dataset::new(Layout::Flat { n_features: 1 }, samples).unwrap()
    }

    fn schema() -> CsvSchema {
        CsvSchema {
            label_column: "group".into(),
            class_map: [("PD".to_string(), 1), ("HC".to_string(), 0)].into(),
            id_column: None,
        }
    }

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(text.as_bytes())
            .unwrap();
        p
    }

    #[test]
    fn load_cohort_shaped_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("group");
        for c in 0..210 {
            text.push_str(&format!(",t{c}"));
        }
        text.push('\n');
        for r in 0..110 {
            text.push_str(if r < 102 { "PD" } else { "HC" });
            for c in 0..210 {
                text.push_str(&format!(",{}", (r * 7 + c) as f64 * 0.01));
            }
            text.push('\n');
        }
        let p = write(dir.path(), "pd_hc.csv", &text);
        let d = load_csv(&p, &schema()).unwrap();
        assert_eq!(d.class_counts(), [8, 102]);
        assert_eq!(d.layout(), Layout::Flat { n_features: 210 });
        assert!(d.samples().iter().all(|s| !s.synthetic));
        assert_eq!(d.input_names()[0], "t0");
    }

    #[test]
    fn header_only_file_is_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "e.csv", "a,b,group\n");
        let d = load_csv(&p, &schema()).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.class_counts(), [0, 0]);
    }

    #[test]
    fn unknown_label_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "l.csv", "a,group\n1.0,XYZ\n");
        match load_csv(&p, &schema()) {
            Err(Error::Label { row, value, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(value, "XYZ");
            }
            other => panic!("expected label error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_and_non_numeric_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "r.csv", "a,b,group\n1,2,PD\n1,PD\n");
        assert!(matches!(
            load_csv(&p, &schema()),
            Err(Error::Parse { row: 2, .. })
        ));
        let p = write(dir.path(), "n.csv", "a,b,group\n1,2,PD\n1,x,HC\n");
        assert!(matches!(
            load_csv(&p, &schema()),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn bad_class_map_is_config_error() {
        let mut s = schema();
        s.class_map.insert("PR".into(), 1);
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn concat_orders_regions() {
        let a = flat(&[("p", vec![1.0, 2.0], 1)]);
        let b = flat(&[("p", vec![3.0, 4.0], 1)]);
        let c = flat(&[("p", vec![5.0, 6.0], 1)]);
        let d = flat(&[("p", vec![7.0, 8.0], 1)]);
        let out = concat_flat(&[a, b, c, d], &[]).unwrap();
        assert_eq!(out.layout(), Layout::Flat { n_features: 8 });
        assert_eq!(
            out.samples()[0].features,
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]
        );
        assert_eq!(out.input_names()[2], "mPFC:x0");
    }

    #[test]
    fn concat_of_duplicated_region_repeats_vector() {
        let a = flat(&[
            ("p", vec![1.5, -2.0, 3.0], 0),
            ("q", vec![0.0, 1.0, 2.0], 1),
        ]);
        let out = concat_flat(&[a.clone(), a.clone(), a.clone(), a], &[]).unwrap();
        for s in out.samples() {
            let v = &s.features;
            assert_eq!(&v[0..3], &v[3..6]);
            assert_eq!(&v[0..3], &v[9..12]);
        }
    }

    #[test]
    fn sequential_minimal_and_shape() {
        let regions: Vec<Dataset> = (0..4).map(|r| flat(&[("p", vec![r as f64], 1)])).collect();
        let out = assemble_sequential(&regions, &[]).unwrap();
        assert_eq!(
            out.layout(),
            Layout::Sequential {
                n_channels: 4,
                n_timesteps: 1
            }
        );
        assert_eq!(out.samples()[0].features, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(out.input_names(), ["PCC", "mPFC", "RIPC", "LIPC"]);
    }

    #[test]
    fn sequential_aligns_by_id() {
        let a = flat(&[("p", vec![1.0, 2.0], 1), ("q", vec![3.0, 4.0], 0)]);
        let b = flat(&[("q", vec![30.0, 40.0], 0), ("p", vec![10.0, 20.0], 1)]);
        let out = assemble_sequential(&[a, b], &["A".into(), "B".into()]).unwrap();
        assert_eq!(out.samples()[0].features, vec![1.0, 10.0, 2.0, 20.0]);
        assert_eq!(out.samples()[1].features, vec![3.0, 30.0, 4.0, 40.0]);
    }

    #[test]
    fn relabelled_sample_is_consistency_error() {
        let a = flat(&[("p", vec![1.0], 1), ("q", vec![2.0], 0)]);
        let b = flat(&[("p", vec![1.0], 1), ("q", vec![2.0], 1)]);
        let err = assemble_sequential(&[a.clone(), a.clone(), a.clone(), b.clone()], &[]);
        assert!(matches!(err, Err(Error::Consistency(_))));
        assert!(matches!(
            concat_flat(&[a.clone(), a.clone(), a, b], &[]),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn id_mismatch_is_assembly_error() {
        let a = flat(&[("p", vec![1.0], 1)]);
        let b = flat(&[("z", vec![1.0], 1)]);
        assert!(matches!(
            assemble_sequential(&[a, b], &[]),
            Err(Error::Assembly(_))
        ));
    }

    #[test]
    fn split_counts_follow_rounding_rule() {
        let d = counts_dataset(102, 8);
        let s = stratified_split(&d, Fractions::SINGLE_SPLIT, 1).unwrap();
        let count = |idx: &[usize], class: u8| {
            idx.iter()
                .filter(|&&i| d.samples()[i].label == class)
                .count()
        };
        assert_eq!(
            (
                count(&s.train, 1),
                count(&s.validation, 1),
                count(&s.test, 1)
            ),
            (72, 15, 15)
        );
        assert_eq!(
            (
                count(&s.train, 0),
                count(&s.validation, 0),
                count(&s.test, 0)
            ),
            (6, 1, 1)
        );

        let d = counts_dataset(10, 10);
        let f = Fractions {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        };
        let s = stratified_split(&d, f, 1).unwrap();
        assert_eq!(
            (s.train.len(), s.validation.len(), s.test.len()),
            (16, 2, 2)
        );
    }

    #[test]
    fn split_is_deterministic() {
        let d = counts_dataset(102, 8);
        let a = stratified_split(&d, Fractions::SINGLE_SPLIT, 99).unwrap();
        let b = stratified_split(&d, Fractions::SINGLE_SPLIT, 99).unwrap();
        assert_eq!(a, b);
        let c = stratified_split(&d, Fractions::SINGLE_SPLIT, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_rejects_tiny_class() {
        // two samples: test rounds to 1, validation to 1, nothing left to train
        let d = counts_dataset(10, 2);
        let f = Fractions {
            train: 0.2,
            validation: 0.4,
            test: 0.4,
        };
        assert!(matches!(stratified_split(&d, f, 0), Err(Error::Split(_))));
        assert!(matches!(
            stratified_split(&counts_dataset(10, 0), Fractions::SINGLE_SPLIT, 0),
            Err(Error::Split(_))
        ));
    }

    #[test]
    fn split_rejects_bad_fractions() {
        let d = counts_dataset(10, 10);
        let f = Fractions {
            train: 0.7,
            validation: 0.2,
            test: 0.2,
        };
        assert!(matches!(stratified_split(&d, f, 0), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn split_partitions_and_stratifies(
            ones in 3usize..80,
            zeros in 3usize..80,
            seed in any::<u64>(),
            test_pct in 5u32..30,
            val_pct in 5u32..30,
        ) {
            let d = counts_dataset(ones, zeros);
            let test = f64::from(test_pct) / 100.0;
            let validation = f64::from(val_pct) / 100.0;
            let f = Fractions { train: 1.0 - test - validation, validation, test };
            let Ok(s) = stratified_split(&d, f, seed) else { return Ok(()); };

            let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..d.len()).collect::<Vec<_>>());

            for (class, n) in [(1u8, ones), (0u8, zeros)] {
                for (part, want) in [(&s.train, f.train), (&s.validation, f.validation), (&s.test, f.test)] {
                    let got = part.iter().filter(|&&i| d.samples()[i].label == class).count();
                    prop_assert!((got as f64 / n as f64 - want).abs() <= 1.0 / n as f64 + 1e-12);
                }
            }
        }

        #[test]
        fn sequential_columns_match_concat_blocks(
            steps in 1usize..12,
            n in 1usize..6,
            values in proptest::collection::vec(-1e3f64..1e3, 4 * 12 * 6),
        ) {
            let regions: Vec<Dataset> = (0..4).map(|r| {
                let samples = (0..n).map(|i| {
                    let start = (r * 6 + i) * 12;
                    Sample::new(i.to_string(), values[start..start + steps].to_vec(), (i % 2) as u8)
                }).collect();
                Dataset::new(Layout::Flat { n_features: steps }, samples).unwrap()
            }).collect();
            let seq = assemble_sequential(&regions, &[]).unwrap();
            let cat = concat_flat(&regions, &[]).unwrap();
            for (a, b) in seq.samples().iter().zip(cat.samples()) {
                for c in 0..4 {
                    let column: Vec<f64> = (0..steps).map(|t| a.features[t * 4 + c]).collect();
                    prop_assert_eq!(&column[..], &b.features[c * steps..(c + 1) * steps]);
                }
            }
        }
    }
}
