//! File-backed state shared by the HTTP service and the CLI: graphs, indices,
//! index pairs with their configuration, labels and results, and jobs.
//!
//! Layout of a state directory:
//!
//! ```text
//! workspace.json              id counters
//! graphs/{id}.nt              ingested graph
//! graphs/{id}.json            graph metadata
//! indices/{id}.json           index metadata and domain spec (the index is rebuilt on open)
//! pairs/{id}/pair.json        configuration, version and strategy status
//! pairs/{id}/labels.jsonl     labels, append-only
//! pairs/{id}/results.jsonl    latest scored pairs
//! jobs/{id}.json              job record
//! jobs/{id}.log.jsonl         strategy audit log
//! ```
//!
//! Every mutation is written through before it returns.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::compare::{run_duplicate_detection, DDConfig, DdError, RunOptions, ScoredPair};
use crate::index::TypeIndex;
use crate::kg::Graph;
use crate::learn::labels::append_line;
use crate::learn::{
    analyze, default_config, next_to_label, AuditEntry, IgnoreList, LabelRecord, LabelStore, LearnError, MetricsReport,
    StoreError,
};
use crate::ntriples::{parse_ntriples, ParseError};
use crate::schema::{extract_domain_spec, infer_emergent_schema, DatatypeTable, MinimalDomainSpec, SpecError};
use crate::vocab::RDF_TYPE;

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error("unknown {kind} {id}")]
    NotFound { kind: &'static str, id: String },
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn not_found(kind: &'static str, id: &str) -> WorkspaceError {
    WorkspaceError::NotFound {
        kind,
        id: id.to_string(),
    }
}

/// Settings that apply to every index pair.
#[derive(Debug, Clone, Default)]
pub struct WorkspaceOptions {
    pub run: RunOptions,
    pub ignore: IgnoreList,
    pub datatypes: DatatypeTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub id: String,
    pub name: String,
    pub triples: usize,
    /// Instance count per `rdf:type`.
    pub types: BTreeMap<String, usize>,
}

/// Where an index's domain spec comes from: a shape IRI or the data itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecSource {
    Shacl(String),
    Emergent,
}

impl Serialize for SpecSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SpecSource::Shacl(iri) => s.serialize_str(iri),
            SpecSource::Emergent => s.serialize_str("emergent"),
        }
    }
}

impl<'de> Deserialize<'de> for SpecSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == "emergent" {
            SpecSource::Emergent
        } else {
            SpecSource::Shacl(s)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexInfo {
    pub id: String,
    pub graph: String,
    pub type_iri: String,
    pub spec_source: SpecSource,
    /// Graph holding the shapes when it is not the indexed graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shapes_graph: Option<String>,
    pub depth: usize,
    pub instances: usize,
    pub spec: MinimalDomainSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum StrategyStatus {
    Idle,
    Running { job: String, step: usize, of: usize },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairInfo {
    pub id: String,
    pub source_index: String,
    pub target_index: String,
    /// Incremented on every configuration change.
    pub version: u64,
    pub config: DDConfig,
    /// Configuration version the stored results were computed with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results_version: Option<u64>,
    pub strategy: StrategyStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    DdRun,
    Strategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Running,
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub kind: JobKind,
    pub pair: String,
    pub status: JobStatus,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Kind-specific summary: result counts for runs, the outcome for strategies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
}

/// Everything a detection run needs, detached from the workspace so the run can
/// proceed without holding it.
#[derive(Clone)]
pub struct RunInputs {
    pub source: Arc<TypeIndex>,
    pub target: Arc<TypeIndex>,
    pub config: DDConfig,
    pub version: u64,
    pub options: RunOptions,
}

impl RunInputs {
    /// Index pairs over one index deduplicate it against itself.
    pub fn run(&self) -> Result<Vec<ScoredPair>, DdError> {
        run_duplicate_detection(&self.source, &self.target, &self.config, &self.options)
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
struct Counters {
    graphs: u64,
    indices: u64,
    pairs: u64,
    jobs: u64,
}

struct GraphEntry {
    info: GraphInfo,
    graph: Arc<Graph>,
}

struct IndexEntry {
    info: IndexInfo,
    index: Arc<TypeIndex>,
}

struct PairEntry {
    info: PairInfo,
    labels: LabelStore,
    results: Vec<ScoredPair>,
}

pub struct Workspace {
    root: Option<PathBuf>,
    options: WorkspaceOptions,
    counters: Counters,
    graphs: BTreeMap<String, GraphEntry>,
    indices: BTreeMap<String, IndexEntry>,
    pairs: BTreeMap<String, PairEntry>,
    jobs: BTreeMap<String, JobRecord>,
    /// Audit logs of in-memory workspaces.
    logs: BTreeMap<String, Vec<AuditEntry>>,
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), StoreError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| StoreError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| StoreError::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("state serializes");
    out.push(b'\n');
    out
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, StoreError> {
    let text = fs::read_to_string(path).map_err(|e| StoreError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
        path: path.to_path_buf(),
        line: e.line(),
        reason: e.to_string(),
    })
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = fs::File::open(path).map_err(|e| StoreError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| StoreError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

fn jsonl<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("state serializes");
        out.push(b'\n');
    }
    out
}

/// Ids in the order they were issued (`g2` before `g10`).
fn sorted_ids(dir: &Path, suffix: &str) -> Result<Vec<String>, StoreError> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut ids = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| StoreError::io(dir, e))? {
        let entry = entry.map_err(|e| StoreError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if suffix.is_empty() {
            if entry.path().is_dir() {
                ids.push(name);
            }
        } else if let Some(id) = name.strip_suffix(suffix) {
            if !id.contains('.') {
                ids.push(id.to_string());
            }
        }
    }
    ids.sort_by_key(|id| (id.len(), id.clone()));
    Ok(ids)
}

impl Workspace {
    /// A workspace that keeps everything in memory.
    pub fn in_memory(options: WorkspaceOptions) -> Self {
        Self {
            root: None,
            options,
            counters: Counters::default(),
            graphs: BTreeMap::new(),
            indices: BTreeMap::new(),
            pairs: BTreeMap::new(),
            jobs: BTreeMap::new(),
            logs: BTreeMap::new(),
        }
    }

    /// Opens the state directory at `root`, creating it when missing, and
    /// restores everything in it. Any unreadable or inconsistent file aborts
    /// the restore.
    pub fn open(root: impl Into<PathBuf>, options: WorkspaceOptions) -> Result<Self, WorkspaceError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| StoreError::io(&root, e))?;
        let mut ws = Self {
            root: Some(root.clone()),
            ..Self::in_memory(options)
        };
        let counters_path = root.join("workspace.json");
        if counters_path.exists() {
            ws.counters = read_json(&counters_path)?;
        }
        for id in sorted_ids(&root.join("graphs"), ".json")? {
            let info: GraphInfo = read_json(&root.join("graphs").join(format!("{id}.json")))?;
            let nt_path = root.join("graphs").join(format!("{id}.nt"));
            let text = fs::read_to_string(&nt_path).map_err(|e| StoreError::io(&nt_path, e))?;
            let graph = parse_ntriples(&text).map_err(|e| StoreError::Corrupt {
                path: nt_path.clone(),
                line: e.line,
                reason: e.reason.clone(),
            })?;
            ws.graphs.insert(
                id,
                GraphEntry {
                    info,
                    graph: Arc::new(graph),
                },
            );
        }
        for id in sorted_ids(&root.join("indices"), ".json")? {
            let path = root.join("indices").join(format!("{id}.json"));
            let info: IndexInfo = read_json(&path)?;
            let graph = ws.graphs.get(&info.graph).ok_or_else(|| StoreError::Corrupt {
                path: path.clone(),
                line: 1,
                reason: format!("index refers to missing graph {}", info.graph),
            })?;
            let index = TypeIndex::build(&graph.graph, info.spec.clone());
            ws.indices.insert(
                id,
                IndexEntry {
                    info,
                    index: Arc::new(index),
                },
            );
        }
        for id in sorted_ids(&root.join("pairs"), "")? {
            let dir = root.join("pairs").join(&id);
            let mut info: PairInfo = read_json(&dir.join("pair.json"))?;
            for idx in [&info.source_index, &info.target_index] {
                if !ws.indices.contains_key(idx) {
                    return Err(StoreError::Corrupt {
                        path: dir.join("pair.json"),
                        line: 1,
                        reason: format!("pair refers to missing index {idx}"),
                    }
                    .into());
                }
            }
            if matches!(info.strategy, StrategyStatus::Running { .. }) {
                info.strategy = StrategyStatus::Failed {
                    reason: "interrupted by restart".into(),
                };
            }
            let labels = LabelStore::open(dir.join("labels.jsonl"))?;
            let results = read_jsonl(&dir.join("results.jsonl"))?;
            ws.pairs.insert(id, PairEntry { info, labels, results });
        }
        for id in sorted_ids(&root.join("jobs"), ".json")? {
            let mut job: JobRecord = read_json(&root.join("jobs").join(format!("{id}.json")))?;
            if job.status == JobStatus::Running {
                job.status = JobStatus::Failed;
                job.error = Some("interrupted by restart".into());
            }
            ws.jobs.insert(id, job);
        }
        Ok(ws)
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn options(&self) -> &WorkspaceOptions {
        &self.options
    }

    /// Writes a full snapshot of the current state. Labels are written
    /// compacted, one line per pair.
    pub fn persist(&self) -> Result<(), WorkspaceError> {
        if self.root.is_none() {
            return Ok(());
        }
        self.save_counters()?;
        for g in self.graphs.values() {
            self.save_graph(g)?;
        }
        for i in self.indices.values() {
            self.save_index(&i.info)?;
        }
        for (id, p) in &self.pairs {
            self.save_pair(&p.info)?;
            self.save_results(id, &p.results)?;
            if let Some(dir) = self.pair_dir(id) {
                p.labels.write_compacted(&dir.join("labels.jsonl"))?;
            }
        }
        for job in self.jobs.values() {
            self.save_job(job)?;
        }
        Ok(())
    }

    fn path(&self, rel: impl AsRef<Path>) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(rel))
    }

    fn pair_dir(&self, id: &str) -> Option<PathBuf> {
        self.path(Path::new("pairs").join(id))
    }

    fn save_counters(&self) -> Result<(), StoreError> {
        match self.path("workspace.json") {
            Some(p) => write_atomic(&p, &to_json(&self.counters)),
            None => Ok(()),
        }
    }

    fn save_graph(&self, g: &GraphEntry) -> Result<(), StoreError> {
        if let Some(dir) = self.path("graphs") {
            write_atomic(&dir.join(format!("{}.nt", g.info.id)), g.graph.to_ntriples().as_bytes())?;
            write_atomic(&dir.join(format!("{}.json", g.info.id)), &to_json(&g.info))?;
        }
        Ok(())
    }

    fn save_index(&self, info: &IndexInfo) -> Result<(), StoreError> {
        match self.path("indices") {
            Some(dir) => write_atomic(&dir.join(format!("{}.json", info.id)), &to_json(info)),
            None => Ok(()),
        }
    }

    fn save_pair(&self, info: &PairInfo) -> Result<(), StoreError> {
        match self.pair_dir(&info.id) {
            Some(dir) => write_atomic(&dir.join("pair.json"), &to_json(info)),
            None => Ok(()),
        }
    }

    fn save_results(&self, id: &str, results: &[ScoredPair]) -> Result<(), StoreError> {
        match self.pair_dir(id) {
            Some(dir) => write_atomic(&dir.join("results.jsonl"), &jsonl(results)),
            None => Ok(()),
        }
    }

    fn save_job(&self, job: &JobRecord) -> Result<(), StoreError> {
        match self.path("jobs") {
            Some(dir) => write_atomic(&dir.join(format!("{}.json", job.id)), &to_json(job)),
            None => Ok(()),
        }
    }

    // Graphs

    /// Parses and stores an N-Triples document.
    pub fn add_graph(&mut self, name: &str, ntriples: &str) -> Result<GraphInfo, WorkspaceError> {
        let graph = parse_ntriples(ntriples)?;
        self.counters.graphs += 1;
        let mut types = BTreeMap::new();
        for t in graph.iter().filter(|t| t.predicate == RDF_TYPE) {
            if let Some(iri) = t.object.as_iri() {
                *types.entry(iri.to_string()).or_insert(0) += 1;
            }
        }
        let info = GraphInfo {
            id: format!("g{}", self.counters.graphs),
            name: name.to_string(),
            triples: graph.len(),
            types,
        };
        let entry = GraphEntry {
            info: info.clone(),
            graph: Arc::new(graph),
        };
        self.save_graph(&entry)?;
        self.save_counters()?;
        self.graphs.insert(info.id.clone(), entry);
        Ok(info)
    }

    pub fn graph(&self, id: &str) -> Result<(&GraphInfo, &Arc<Graph>), WorkspaceError> {
        self.graphs
            .get(id)
            .map(|g| (&g.info, &g.graph))
            .ok_or_else(|| not_found("graph", id))
    }

    pub fn graphs(&self) -> impl Iterator<Item = &GraphInfo> {
        self.graphs.values().map(|g| &g.info)
    }

    // Indices

    /// Derives a domain spec for `type_iri` and indexes its instances in `graph`.
    pub fn create_index(
        &mut self,
        graph: &str,
        type_iri: &str,
        spec_source: SpecSource,
        shapes_graph: Option<&str>,
        depth: usize,
    ) -> Result<IndexInfo, WorkspaceError> {
        let (_, data) = self.graph(graph)?;
        let data = data.clone();
        let spec = match &spec_source {
            SpecSource::Emergent => infer_emergent_schema(&data, type_iri, depth, &self.options.datatypes)?,
            SpecSource::Shacl(shape) => {
                let shapes = match shapes_graph {
                    Some(sg) => self.graph(sg)?.1.clone(),
                    None => data.clone(),
                };
                let spec = extract_domain_spec(&shapes, shape, depth, &self.options.datatypes)?;
                if spec.type_iri != type_iri {
                    return Err(WorkspaceError::Invalid(format!(
                        "shape {shape} targets {} rather than {type_iri}",
                        spec.type_iri
                    )));
                }
                spec
            }
        };
        let index = TypeIndex::build(&data, spec.clone());
        if index.is_empty() {
            return Err(SpecError::NoInstances(type_iri.to_string()).into());
        }
        self.counters.indices += 1;
        let info = IndexInfo {
            id: format!("i{}", self.counters.indices),
            graph: graph.to_string(),
            type_iri: type_iri.to_string(),
            spec_source,
            shapes_graph: shapes_graph.map(str::to_string),
            depth,
            instances: index.len(),
            spec,
        };
        self.save_index(&info)?;
        self.save_counters()?;
        self.indices.insert(
            info.id.clone(),
            IndexEntry {
                info: info.clone(),
                index: Arc::new(index),
            },
        );
        Ok(info)
    }

    pub fn index(&self, id: &str) -> Result<(&IndexInfo, &Arc<TypeIndex>), WorkspaceError> {
        self.indices
            .get(id)
            .map(|i| (&i.info, &i.index))
            .ok_or_else(|| not_found("index", id))
    }

    pub fn indices(&self) -> impl Iterator<Item = &IndexInfo> {
        self.indices.values().map(|i| &i.info)
    }

    // Pairs

    /// Creates an index pair with the bootstrap default configuration. Using
    /// the same index twice deduplicates it against itself.
    pub fn create_pair(&mut self, source: &str, target: &str) -> Result<PairInfo, WorkspaceError> {
        let (_, s) = self.index(source)?;
        let (_, t) = self.index(target)?;
        let config = default_config(s.spec(), t.spec(), &self.options.ignore, true)?;
        self.counters.pairs += 1;
        let id = format!("p{}", self.counters.pairs);
        let info = PairInfo {
            id: id.clone(),
            source_index: source.to_string(),
            target_index: target.to_string(),
            version: 1,
            config,
            results_version: None,
            strategy: StrategyStatus::Idle,
        };
        let labels = match self.pair_dir(&id) {
            Some(dir) => LabelStore::open(dir.join("labels.jsonl"))?,
            None => LabelStore::in_memory(),
        };
        self.save_pair(&info)?;
        self.save_counters()?;
        self.pairs.insert(
            id,
            PairEntry {
                info: info.clone(),
                labels,
                results: Vec::new(),
            },
        );
        Ok(info)
    }

    fn pair_entry(&self, id: &str) -> Result<&PairEntry, WorkspaceError> {
        self.pairs.get(id).ok_or_else(|| not_found("pair", id))
    }

    fn pair_entry_mut(&mut self, id: &str) -> Result<&mut PairEntry, WorkspaceError> {
        self.pairs.get_mut(id).ok_or_else(|| not_found("pair", id))
    }

    pub fn pair(&self, id: &str) -> Result<&PairInfo, WorkspaceError> {
        Ok(&self.pair_entry(id)?.info)
    }

    pub fn pairs(&self) -> impl Iterator<Item = &PairInfo> {
        self.pairs.values().map(|p| &p.info)
    }

    fn specs(&self, info: &PairInfo) -> Result<(&MinimalDomainSpec, &MinimalDomainSpec), WorkspaceError> {
        Ok((
            self.index(&info.source_index)?.1.spec(),
            self.index(&info.target_index)?.1.spec(),
        ))
    }

    fn ensure_idle(&self, info: &PairInfo) -> Result<(), WorkspaceError> {
        match &info.strategy {
            StrategyStatus::Running { job, step, of } => Err(WorkspaceError::Conflict(format!(
                "strategy job {job} is running (step {step} of {of}) on pair {}",
                info.id
            ))),
            _ => Ok(()),
        }
    }

    /// Validates and stores a new configuration, bumping the version.
    pub fn set_config(&mut self, id: &str, config: DDConfig) -> Result<PairInfo, WorkspaceError> {
        let info = self.pair(id)?;
        self.ensure_idle(info)?;
        let (s, t) = self.specs(info)?;
        config.validate(s, t)?;
        self.replace_config(id, config)
    }

    fn replace_config(&mut self, id: &str, config: DDConfig) -> Result<PairInfo, WorkspaceError> {
        let mut info = self.pair(id)?.clone();
        if info.config != config {
            info.config = config;
            info.version += 1;
        }
        self.save_pair(&info)?;
        self.pair_entry_mut(id)?.info = info.clone();
        Ok(info)
    }

    /// Snapshot of what a detection run on pair `id` needs.
    pub fn run_inputs(&self, id: &str) -> Result<RunInputs, WorkspaceError> {
        let info = self.pair(id)?;
        let source = self.index(&info.source_index)?.1.clone();
        let target = if info.source_index == info.target_index {
            source.clone()
        } else {
            self.index(&info.target_index)?.1.clone()
        };
        Ok(RunInputs {
            source,
            target,
            config: info.config.clone(),
            version: info.version,
            options: self.options.run,
        })
    }

    /// Stores the results of a run made with configuration `version`.
    pub fn store_results(&mut self, id: &str, version: u64, results: Vec<ScoredPair>) -> Result<(), WorkspaceError> {
        self.save_results(id, &results)?;
        let mut info = self.pair(id)?.clone();
        info.results_version = Some(version);
        self.save_pair(&info)?;
        let entry = self.pair_entry_mut(id)?;
        entry.info = info;
        entry.results = results;
        Ok(())
    }

    /// Runs detection on pair `id` in the calling thread and stores the results.
    pub fn run_now(&mut self, id: &str) -> Result<&[ScoredPair], WorkspaceError> {
        let inputs = self.run_inputs(id)?;
        let results = inputs.run()?;
        self.store_results(id, inputs.version, results)?;
        Ok(&self.pair_entry(id)?.results)
    }

    /// Latest results, optionally filtered by the accept flag, paged.
    pub fn results(
        &self,
        id: &str,
        accepted: Option<bool>,
        offset: usize,
        limit: Option<usize>,
    ) -> Result<Vec<ScoredPair>, WorkspaceError> {
        let entry = self.pair_entry(id)?;
        Ok(entry
            .results
            .iter()
            .filter(|p| accepted.is_none_or(|a| p.accepted == a))
            .skip(offset)
            .take(limit.unwrap_or(usize::MAX))
            .cloned()
            .collect())
    }

    pub fn all_results(&self, id: &str) -> Result<&[ScoredPair], WorkspaceError> {
        Ok(&self.pair_entry(id)?.results)
    }

    /// The labelling queue. Refused while a strategy runs on the pair.
    pub fn next_labels(&self, id: &str, n: usize) -> Result<Vec<ScoredPair>, WorkspaceError> {
        let entry = self.pair_entry(id)?;
        self.ensure_idle(&entry.info)?;
        if n == 0 {
            return Err(WorkspaceError::Invalid("n must be at least 1".into()));
        }
        Ok(next_to_label(
            &entry.results,
            &entry.labels.label_set(),
            entry.info.config.decision.threshold,
            n,
        ))
    }

    /// Records a label. The first label replaces an untouched bootstrap
    /// configuration with the regular default.
    pub fn record_label(
        &mut self,
        id: &str,
        source_id: &str,
        target_id: &str,
        is_duplicate: bool,
    ) -> Result<LabelRecord, WorkspaceError> {
        let entry = self.pair_entry(id)?;
        let first = entry.labels.is_empty() && entry.info.version == 1;
        let (s, t) = self.specs(&entry.info)?;
        let regular = default_config(s, t, &self.options.ignore, false)?;
        let rec = self
            .pair_entry_mut(id)?
            .labels
            .record(source_id, target_id, is_duplicate)?;
        if first {
            self.replace_config(id, regular)?;
        }
        Ok(rec)
    }

    pub fn labels(&self, id: &str) -> Result<&LabelStore, WorkspaceError> {
        Ok(&self.pair_entry(id)?.labels)
    }

    /// Report of the latest results against the stored labels.
    pub fn metrics(&self, id: &str) -> Result<MetricsReport, WorkspaceError> {
        let entry = self.pair_entry(id)?;
        Ok(analyze(&entry.results, &entry.labels.label_set()))
    }

    // Jobs

    pub fn create_job(&mut self, kind: JobKind, pair: &str) -> Result<JobRecord, WorkspaceError> {
        self.pair(pair)?;
        self.counters.jobs += 1;
        let job = JobRecord {
            id: format!("j{}", self.counters.jobs),
            kind,
            pair: pair.to_string(),
            status: JobStatus::Running,
            created_at: Utc::now(),
            finished_at: None,
            error: None,
            result: None,
        };
        self.save_job(&job)?;
        self.save_counters()?;
        self.jobs.insert(job.id.clone(), job.clone());
        Ok(job)
    }

    pub fn finish_job(
        &mut self,
        id: &str,
        outcome: Result<serde_json::Value, String>,
    ) -> Result<JobRecord, WorkspaceError> {
        let job = self.jobs.get_mut(id).ok_or_else(|| not_found("job", id))?;
        if job.status != JobStatus::Running {
            return Err(WorkspaceError::Conflict(format!("job {id} already finished")));
        }
        job.finished_at = Some(Utc::now());
        match outcome {
            Ok(v) => {
                job.status = JobStatus::Succeeded;
                job.result = Some(v);
            }
            Err(e) => {
                job.status = JobStatus::Failed;
                job.error = Some(e);
            }
        }
        let job = job.clone();
        self.save_job(&job)?;
        Ok(job)
    }

    pub fn job(&self, id: &str) -> Result<&JobRecord, WorkspaceError> {
        self.jobs.get(id).ok_or_else(|| not_found("job", id))
    }

    /// Strategy audit log of job `id`.
    pub fn job_log(&self, id: &str) -> Result<Vec<AuditEntry>, WorkspaceError> {
        self.job(id)?;
        match self.path("jobs") {
            Some(dir) => Ok(read_jsonl(&dir.join(format!("{id}.log.jsonl")))?),
            None => Ok(self.logs.get(id).cloned().unwrap_or_default()),
        }
    }

    pub fn append_job_log(&mut self, id: &str, entries: &[AuditEntry]) -> Result<(), WorkspaceError> {
        self.job(id)?;
        match self.path("jobs") {
            Some(dir) => {
                let path = dir.join(format!("{id}.log.jsonl"));
                for e in entries {
                    append_line(&path, &serde_json::to_string(e).expect("audit serializes"))?;
                }
            }
            None => self.logs.entry(id.to_string()).or_default().extend_from_slice(entries),
        }
        Ok(())
    }

    /// Marks a strategy as running on pair `id` and returns its job.
    pub fn begin_strategy(&mut self, id: &str, steps: usize) -> Result<JobRecord, WorkspaceError> {
        let info = self.pair(id)?;
        self.ensure_idle(info)?;
        if self.pair_entry(id)?.labels.is_empty() {
            return Err(LearnError::NoLabels.into());
        }
        let job = self.create_job(JobKind::Strategy, id)?;
        self.set_strategy_status(
            id,
            StrategyStatus::Running {
                job: job.id.clone(),
                step: 0,
                of: steps,
            },
        )?;
        Ok(job)
    }

    pub fn set_strategy_status(&mut self, id: &str, status: StrategyStatus) -> Result<(), WorkspaceError> {
        let mut info = self.pair(id)?.clone();
        info.strategy = status;
        self.save_pair(&info)?;
        self.pair_entry_mut(id)?.info = info;
        Ok(())
    }

    /// Ends a strategy: adopts `config` when given, then returns the pair to
    /// idle, or marks it failed with `error`.
    pub fn end_strategy(
        &mut self,
        id: &str,
        config: Option<DDConfig>,
        error: Option<String>,
    ) -> Result<PairInfo, WorkspaceError> {
        let status = match error {
            Some(reason) => StrategyStatus::Failed { reason },
            None => StrategyStatus::Idle,
        };
        self.set_strategy_status(id, status)?;
        match config {
            Some(cfg) => self.replace_config(id, cfg),
            None => Ok(self.pair(id)?.clone()),
        }
    }
}
