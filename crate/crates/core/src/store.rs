//! Run directories on disk.
//!
//! A run directory holds `config.json`, `estimates.csv`, `states.csv`,
//! `manifest.json` and `datasets.csv` (one SHA-256 digest per simulated
//! dataset), plus `datasets/` when datasets are exported. Analysis adds
//! `performance.csv`, `performance.json`, `missingness.csv`, `table.txt`
//! and `table.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::StudyConfig;
use crate::engine::{self, DatasetRecord, KeepDatasets, Manifest, RunOptions, StudyOutput};
use crate::error::{Error, Result};
use crate::perf::{self, Summary, SummaryOptions, TrueValues};
use crate::records::{self, EstimatesRecord};
use crate::report::{render_table, TableLayout};
use crate::rng::StatesRecord;

pub const CONFIG_FILE: &str = "config.json";
pub const ESTIMATES_FILE: &str = "estimates.csv";
pub const STATES_FILE: &str = "states.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DATASETS_FILE: &str = "datasets.csv";
pub const DATASETS_DIR: &str = "datasets";
pub const PERFORMANCE_CSV: &str = "performance.csv";
pub const PERFORMANCE_JSON: &str = "performance.json";
pub const MISSINGNESS_FILE: &str = "missingness.csv";
pub const TABLE_TEXT: &str = "table.txt";
pub const TABLE_CSV: &str = "table.csv";

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// `datasets/<dgm index>_<repetition>.csv`; DGM ids are not file-name safe.
fn dataset_file(dgm_index: usize, repetition: u64) -> String {
    format!("{DATASETS_DIR}/dgm{dgm_index}_rep{repetition}.csv")
}

/// Dataset retention implied by the config.
pub fn keep_datasets(cfg: &StudyConfig) -> KeepDatasets {
    if cfg.output.export_datasets {
        KeepDatasets::Full
    } else {
        KeepDatasets::Digest
    }
}

fn datasets_to_csv(cfg: &StudyConfig, datasets: &[DatasetRecord]) -> Result<String> {
    let ids: Vec<String> = cfg.dgms()?.into_iter().map(|d| d.id).collect();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Error::InvalidParameter(format!("datasets index: {e}"));
    w.write_record(["dgm_id", "repetition", "sha256", "file"]).map_err(fail)?;
    for d in datasets {
        let file = match &d.csv {
            Some(_) => dataset_file(ids.iter().position(|i| *i == d.dgm_id).unwrap_or(0), d.repetition),
            None => String::new(),
        };
        w.write_record([d.dgm_id.as_str(), &d.repetition.to_string(), &d.digest, &file])
            .map_err(fail)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?).expect("UTF-8"))
}

/// `(dgm_id, repetition, sha256)` from a datasets index.
pub fn read_dataset_digests(dir: &Path) -> Result<Vec<(String, u64, String)>> {
    let path = dir.join(DATASETS_FILE);
    let text = read(&path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let rep = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(path.display().to_string(), "bad repetition"))?;
        out.push((rec[0].to_string(), rep, rec.get(2).unwrap_or("").to_string()));
    }
    Ok(out)
}

/// Writes every file of a finished run, and the analysis if the config asks
/// for it.
pub fn write_run(dir: &Path, cfg: &StudyConfig, out: &StudyOutput) -> Result<Option<Summary>> {
    ensure_dir(dir)?;
    write(&dir.join(CONFIG_FILE), &cfg.to_json())?;
    write(&dir.join(ESTIMATES_FILE), &records::estimates_to_csv(&out.estimates))?;
    write(&dir.join(STATES_FILE), &records::states_to_csv(&out.states))?;
    write(&dir.join(MANIFEST_FILE), &out.manifest.to_json())?;
    write_datasets(dir, cfg, &out.datasets, false)?;
    if cfg.output.analyze {
        let truths = out.manifest.true_values();
        return write_analysis(dir, &out.estimates, &truths, &engine::summary_options(cfg)).map(Some);
    }
    Ok(None)
}

fn write_datasets(dir: &Path, cfg: &StudyConfig, datasets: &[DatasetRecord], append: bool) -> Result<()> {
    let ids: Vec<String> = cfg.dgms()?.into_iter().map(|d| d.id).collect();
    if datasets.iter().any(|d| d.csv.is_some()) {
        ensure_dir(&dir.join(DATASETS_DIR))?;
    }
    for d in datasets {
        if let Some(csv) = &d.csv {
            let k = ids.iter().position(|i| *i == d.dgm_id).unwrap_or(0);
            write(&dir.join(dataset_file(k, d.repetition)), csv)?;
        }
    }
    let path = dir.join(DATASETS_FILE);
    if append && path.exists() {
        let mut text = read(&path)?;
        let more = datasets_to_csv(cfg, datasets)?;
        text.push_str(more.split_once('\n').map_or("", |(_, rest)| rest));
        let mut rows: Vec<&str> = text.lines().skip(1).collect();
        let order = |line: &str| {
            let mut it = line.splitn(3, ',');
            let id = it.next().unwrap_or("");
            let rep: u64 = it.next().and_then(|s| s.parse().ok()).unwrap_or(0);
            (ids.iter().position(|i| i == id).unwrap_or(usize::MAX), rep)
        };
        rows.sort_by_key(|l| order(l));
        let header = text.lines().next().unwrap_or("").to_string();
        let mut merged = header;
        merged.push('\n');
        for r in rows {
            merged.push_str(r);
            merged.push('\n');
        }
        write(&path, &merged)
    } else {
        write(&path, &datasets_to_csv(cfg, datasets)?)
    }
}

/// Computes performance and writes the analysis files. Running this on the
/// files of a stored run gives the same bytes as analysing during the run.
pub fn write_analysis(
    dir: &Path,
    estimates: &[EstimatesRecord],
    truths: &TrueValues,
    opts: &SummaryOptions,
) -> Result<Summary> {
    ensure_dir(dir)?;
    let summary = perf::summarize(estimates, truths, opts)?;
    write(&dir.join(PERFORMANCE_CSV), &perf::performance_to_csv(&summary.estimates))?;
    write(&dir.join(PERFORMANCE_JSON), &perf::performance_to_json(&summary.estimates))?;
    write(
        &dir.join(MISSINGNESS_FILE),
        &perf::missingness_to_csv(&perf::missingness_report(estimates)),
    )?;
    let table = render_table(
        &summary.estimates,
        &TableLayout {
            measures: opts.measures.clone(),
            methods: Vec::new(),
        },
    );
    write(&dir.join(TABLE_TEXT), &table.text)?;
    write(&dir.join(TABLE_CSV), &table.csv)?;
    Ok(summary)
}

/// A run directory read back from disk.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub dir: PathBuf,
    pub config: StudyConfig,
    pub estimates: Vec<EstimatesRecord>,
    pub states: Vec<StatesRecord>,
    pub manifest: Manifest,
}

impl StoredRun {
    pub fn load(dir: &Path) -> Result<Self> {
        let config = StudyConfig::load(&dir.join(CONFIG_FILE))?;
        let estimates_path = dir.join(ESTIMATES_FILE);
        let estimates = records::estimates_from_csv(&read(&estimates_path)?, &estimates_path.display().to_string())?;
        let states_path = dir.join(STATES_FILE);
        let states = records::states_from_csv(&read(&states_path)?, &states_path.display().to_string())?;
        let manifest_path = dir.join(MANIFEST_FILE);
        let manifest = Manifest::from_json(&read(&manifest_path)?, &manifest_path.display().to_string())?;
        Ok(StoredRun {
            dir: dir.to_path_buf(),
            config,
            estimates,
            states,
            manifest,
        })
    }

    /// Runs `extra` further repetitions and rewrites the directory as if the
    /// study had been run with `n_sim + extra` from the start.
    pub fn continue_in_place(mut self, extra: u64, opts: &RunOptions) -> Result<Option<Summary>> {
        let mut opts = opts.clone();
        opts.keep_datasets = keep_datasets(&self.config);
        let more = engine::continue_study(&self.config, &self.states, extra, &opts)?;
        if extra == 0 {
            return Ok(None);
        }
        let ids: Vec<String> = self.config.dgms()?.into_iter().map(|d| d.id).collect();
        let rank = |id: &str| ids.iter().position(|i| i == id).unwrap_or(usize::MAX);
        self.estimates.extend(more.estimates);
        self.estimates.sort_by_key(|r| (rank(&r.dgm_id), r.repetition));
        self.states.extend(more.states);
        self.states.sort_by_key(|s| (rank(&s.dgm_id), s.repetition));
        self.config.n_sim += extra;
        let dir = self.dir.clone();
        write(&dir.join(CONFIG_FILE), &self.config.to_json())?;
        write(&dir.join(ESTIMATES_FILE), &records::estimates_to_csv(&self.estimates))?;
        write(&dir.join(STATES_FILE), &records::states_to_csv(&self.states))?;
        write(&dir.join(MANIFEST_FILE), &more.manifest.to_json())?;
        write_datasets(&dir, &self.config, &more.datasets, true)?;
        if self.config.output.analyze {
            let truths = more.manifest.true_values();
            return write_analysis(&dir, &self.estimates, &truths, &engine::summary_options(&self.config)).map(Some);
        }
        Ok(None)
    }
}

/// Runs a study and writes its directory.
pub fn run_to_dir(dir: &Path, cfg: &StudyConfig, opts: &RunOptions) -> Result<(StudyOutput, Option<Summary>)> {
    let mut opts = opts.clone();
    opts.keep_datasets = keep_datasets(cfg);
    let out = engine::run_study(cfg, &opts)?;
    let summary = write_run(dir, cfg, &out)?;
    Ok((out, summary))
}
