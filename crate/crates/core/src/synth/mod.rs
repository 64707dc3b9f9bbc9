//! Seeded generator of synthetic application corpora with known ground
//! truth: forms, document stand-ins with extraction sidecars, injected
//! faults and per-check labels.

mod facts;
mod truth;

pub use facts::{generate_facts, render_doc, render_form, tax_id, AppFacts, Fact, Site};
pub use truth::{expected_status, selector_site, DocState, TruthView};

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::extract::{schema_for, Fault, MemoryFixtures, Sidecar, SidecarMeta};
use crate::ingest::{
    infer_slot, parse_form_xml, render_form_xml, ApplicationBundle, DocumentRef, DocumentSlot, FileKind, FormatPolicy,
    Origin, UnsupportedNotice, SIDECAR_SUFFIX,
};
use crate::report::{cost_report, Label, Labels};
use crate::rules::{Catalog, CheckStatus, ReportKind};
use crate::typology::{TypologyId, DEFAULT_MIX};

/// Average extraction spend per application for each typology report.
pub const TYPOLOGY_COST: [(&str, f64, u64); 11] = [
    ("1", 0.05, 37),
    ("2.1.1", 0.06, 61),
    ("2.1.2", 0.02, 34),
    ("2.2.1", 0.02, 24),
    ("2.2.2", 0.09, 108),
    ("3.1", 0.02, 41),
    ("3.2", 0.10, 87),
    ("3.3", 0.09, 23),
    ("4", 0.04, 39),
    ("5.1", 0.03, 25),
    ("5.2", 0.21, 173),
];
pub const ELIGIBILITY_COST: (f64, u64) = (0.01, 13);
pub const COMMON_CORE_COST: (f64, u64) = (0.02, 29);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub n_apps: usize,
    /// Target fraction of non-NA checks that come out auto-verified.
    pub consistency_rate: f64,
    /// Relative weights of typologies 1..=5.
    pub typology_mix: [f64; 5],
    /// Exact application counts per typology; overrides `n_apps` and the mix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub typology_plan: Option<Vec<(TypologyId, usize)>>,
    /// Fraction of documents uploaded with a disallowed extension.
    pub unsupported_rate: f64,
    /// Fraction of extractable documents the backend fails to read.
    pub reading_error_rate: f64,
    pub docs_per_app: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_apps: 10,
            consistency_rate: 0.76,
            typology_mix: DEFAULT_MIX,
            typology_plan: None,
            unsupported_rate: 0.0,
            reading_error_rate: 0.0,
            docs_per_app: 11,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("consistency rate", self.consistency_rate),
            ("unsupported rate", self.unsupported_rate),
            ("reading error rate", self.reading_error_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.typology_mix.iter().any(|w| !w.is_finite() || *w < 0.0) || self.typology_mix.iter().sum::<f64>() <= 0.0 {
            return Err("typology mix needs non-negative weights with a positive sum".into());
        }
        if self.docs_per_app < 8 {
            return Err(format!("docs per application must be at least 8, got {}", self.docs_per_app));
        }
        Ok(())
    }

    fn typologies(&self, rng: &mut ChaCha8Rng) -> Vec<TypologyId> {
        let mut out = Vec::new();
        match &self.typology_plan {
            Some(plan) => {
                for (t, n) in plan {
                    out.extend(std::iter::repeat(t.clone()).take(*n));
                }
            }
            None => {
                // Largest-remainder apportionment so the mix holds exactly.
                let total: f64 = self.typology_mix.iter().sum();
                let quotas: Vec<f64> = self.typology_mix.iter().map(|w| w / total * self.n_apps as f64).collect();
                let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
                let mut order: Vec<usize> = (0..5).collect();
                order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
                let missing = self.n_apps - counts.iter().sum::<usize>();
                for &i in order.iter().take(missing) {
                    counts[i] += 1;
                }
                for (i, n) in counts.into_iter().enumerate() {
                    let subs = TypologyId::under_major(i as u8 + 1);
                    for _ in 0..n {
                        out.push(subs.choose(rng).expect("every major has ids").clone());
                    }
                }
            }
        }
        out.shuffle(rng);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    /// The document states a different value than the truth.
    Discrepancy,
    /// The document lacks the value.
    Missing,
    /// The file was uploaded in a disallowed format.
    Unsupported,
    /// The backend cannot read the file.
    ReadFailure,
}

/// One injected deviation from a consistent application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedFault {
    pub kind: FaultKind,
    /// `slot.tag`, `form.field` or a relative file path.
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injected: Option<String>,
    /// Checks that stop being auto-verifiable because of this fault.
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedFile {
    pub rel_path: String,
    pub bytes: Vec<u8>,
    pub sidecar: Option<Sidecar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedApp {
    pub app_id: String,
    pub typology: TypologyId,
    pub form_xml: String,
    pub files: Vec<GeneratedFile>,
    pub faults: Vec<InjectedFault>,
    /// Expected status of every applicable check.
    pub expected: BTreeMap<String, CheckStatus>,
    /// Ground truth for every check that is not `not_applicable`.
    pub labels: BTreeMap<String, Label>,
}

pub struct Corpus {
    pub config: GenConfig,
    pub catalog_version: String,
    pub apps: Vec<GeneratedApp>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusTotals {
    pub applications: usize,
    pub documents: usize,
    pub unsupported_documents: usize,
    pub read_failures: usize,
    pub comparable_checks: usize,
    pub consistent_checks: usize,
}

#[derive(Debug, Serialize)]
struct GeneratorManifest<'a> {
    config: &'a GenConfig,
    catalog_version: &'a str,
    totals: CorpusTotals,
    applications: Vec<AppManifest<'a>>,
}

#[derive(Debug, Serialize)]
struct AppManifest<'a> {
    app_id: &'a str,
    typology: String,
    faults: &'a [InjectedFault],
}

/// Paths written by [`Corpus::write`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub apps: PathBuf,
    pub labels: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Debug, Clone)]
enum Member {
    Direct { rel_path: String, ext: &'static str },
    Archive { rel_path: String, members: Vec<String> },
}

#[derive(Debug, Clone)]
struct Draft {
    facts: AppFacts,
    /// Extractable slot per document file, keyed by relative path.
    slots: BTreeMap<String, DocumentSlot>,
    files: Vec<Member>,
    unsupported: BTreeSet<String>,
    failing: BTreeSet<String>,
}

impl Draft {
    fn doc_states(&self) -> BTreeMap<DocumentSlot, DocState> {
        self.slots
            .iter()
            .map(|(rel, slot)| {
                let state = if self.unsupported.contains(rel) {
                    DocState::Unsupported
                } else if self.failing.contains(rel) {
                    DocState::ReadFailure
                } else {
                    DocState::Readable
                };
                (*slot, state)
            })
            .collect()
    }
}

fn slot_file(slot: DocumentSlot) -> &'static str {
    match slot {
        DocumentSlot::Invoice => "invoice/fatura.pdf",
        DocumentSlot::Receipt => "receipt/recibo.pdf",
        DocumentSlot::PropertyRegistry => "property_registry/certidao.pdf",
        DocumentSlot::PriorCommunication => "prior_communication/mcp.pdf",
        DocumentSlot::EnergyCertificate => "energy_certificate/certificado.pdf",
        DocumentSlot::EquipmentDatasheet => "equipment_datasheet/ficha_tecnica.pdf",
        DocumentSlot::Photo | DocumentSlot::Other => "other/anexo.pdf",
    }
}

fn draft_files(rng: &mut ChaCha8Rng, facts: AppFacts, docs_per_app: usize) -> Draft {
    let mut files = Vec::new();
    let mut slots = BTreeMap::new();
    for slot in facts.docs.keys() {
        let rel = slot_file(*slot).to_string();
        slots.insert(rel.clone(), *slot);
        files.push(Member::Direct { rel_path: rel, ext: "pdf" });
    }
    let mut remaining = docs_per_app.saturating_sub(files.len());
    if remaining >= 3 && rng.gen_bool(0.25) {
        files.push(Member::Archive {
            rel_path: "photos/fotos.zip".into(),
            members: vec!["img_1.png".into(), "img_2.png".into()],
        });
        remaining -= 2;
    }
    for i in 1..=remaining {
        files.push(Member::Direct {
            rel_path: format!("photos/foto_{i:02}.jpg"),
            ext: "jpg",
        });
    }
    Draft {
        facts,
        slots,
        files,
        unsupported: BTreeSet::new(),
        failing: BTreeSet::new(),
    }
}

fn disallowed(rel: &str, ext: &str) -> String {
    let stem = rel.strip_suffix(&format!(".{ext}")).unwrap_or(rel);
    let bad = if ext == "pdf" { "docx" } else { "heic" };
    format!("{stem}.{bad}")
}

fn file_bytes(app_id: &str, rel: &str, ext: &str) -> Vec<u8> {
    let tag = format!("{app_id}/{rel}");
    match ext {
        "pdf" => format!("%PDF-1.4\n% {tag}\n1 0 obj << /Type /Catalog >> endobj\ntrailer << /Root 1 0 R >>\n%%EOF\n").into_bytes(),
        "jpg" => [&[0xFF, 0xD8, 0xFF, 0xE0][..], tag.as_bytes(), &[0xFF, 0xD9]].concat(),
        "png" => [&b"\x89PNG\r\n\x1a\n"[..], tag.as_bytes()].concat(),
        _ => format!("unsupported upload {tag}\n").into_bytes(),
    }
}

fn zip_bytes(app_id: &str, rel: &str, members: &[String]) -> Vec<u8> {
    use zip::write::SimpleFileOptions;
    let mut w = zip::ZipWriter::new(io::Cursor::new(Vec::new()));
    let opts = SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());
    for m in members {
        w.start_file(m.as_str(), opts).expect("in-memory zip");
        w.write_all(&file_bytes(app_id, &format!("{rel}/{m}"), "png")).expect("in-memory zip");
    }
    w.finish().expect("in-memory zip").into_inner()
}

fn cost_split(typology: &TypologyId, kind: ReportKind, docs: usize) -> SidecarMeta {
    let (eur, secs) = match kind {
        ReportKind::Eligibility => ELIGIBILITY_COST,
        ReportKind::CommonCore => COMMON_CORE_COST,
        ReportKind::Typology => {
            let id = typology.to_string();
            let row = TYPOLOGY_COST.iter().find(|r| r.0 == id).expect("cost row per catalog id");
            (row.1, row.2)
        }
    };
    let n = docs.max(1);
    SidecarMeta {
        cost_eur: eur / n as f64,
        elapsed_ms: secs * 1000 / n as u64,
    }
}

struct Budget {
    rate: f64,
    comparable: usize,
    consistent: usize,
}

impl Budget {
    /// Auto-verified checks this application should end with.
    fn target(&self, k: usize) -> usize {
        let goal = (self.rate * (self.comparable + k) as f64 + 1e-9).floor() as usize;
        goal.saturating_sub(self.consistent)
    }
}

fn statuses(catalog: &Catalog, draft: &Draft, tolerance: i64) -> BTreeMap<String, CheckStatus> {
    let states = draft.doc_states();
    let view = TruthView {
        facts: &draft.facts,
        docs: &states,
        tolerance_cents: tolerance,
    };
    catalog
        .checks_for(&draft.facts.typology)
        .into_iter()
        .map(|d| (d.id.clone(), expected_status(d, &view)))
        .collect()
}

fn auto_set(s: &BTreeMap<String, CheckStatus>) -> BTreeSet<String> {
    s.iter()
        .filter(|(_, st)| **st == CheckStatus::AutoVerified)
        .map(|(id, _)| id.clone())
        .collect()
}

/// Injects discrepancies and omissions until the application has
/// exactly `target` auto-verifiable checks, or no further fault fits.
fn inject(rng: &mut ChaCha8Rng, catalog: &Catalog, draft: &mut Draft, target: usize) -> Vec<InjectedFault> {
    let tol = catalog.amount_tolerance_cents;
    let checks = catalog.checks_for(&draft.facts.typology);
    let states = draft.doc_states();
    let conditional: BTreeSet<Site> = checks.iter().filter_map(|c| c.when.as_ref()).map(|w| selector_site(w.operand())).collect();
    let mut sites: BTreeSet<Site> = BTreeSet::new();
    for c in &checks {
        for s in std::iter::once(&c.lhs).chain(c.rhs.as_ref()) {
            let site = selector_site(s);
            let readable = match &site {
                Site::Doc { doc, .. } => states.get(doc) == Some(&DocState::Readable),
                Site::Form { .. } => true,
            };
            if readable && !conditional.contains(&site) && draft.facts.get(&site).is_some() {
                sites.insert(site);
            }
        }
    }
    let company = match draft.facts.form.get("company_tax_id") {
        Some(Fact::TaxId(t)) => t.clone(),
        _ => String::new(),
    };
    let mut candidates: Vec<(Site, Option<Fact>)> = Vec::new();
    for site in &sites {
        let truth = draft.facts.get(site).expect("filtered above").clone();
        for m in facts::mutations(rng, site, &truth, &draft.facts.typology, &company) {
            candidates.push((site.clone(), Some(m)));
        }
        if matches!(site, Site::Doc { .. }) {
            candidates.push((site.clone(), None));
        }
    }
    candidates.shuffle(rng);

    let mut current = auto_set(&statuses(catalog, draft, tol));
    let mut faults = Vec::new();
    let mut touched: BTreeSet<Site> = BTreeSet::new();
    for (site, replacement) in candidates {
        if current.len() <= target {
            break;
        }
        if touched.contains(&site) {
            continue;
        }
        let truth = draft.facts.get(&site).cloned();
        draft.facts.set(&site, replacement.clone());
        let next = auto_set(&statuses(catalog, draft, tol));
        let lost: Vec<String> = current.difference(&next).cloned().collect();
        let fits = next.is_subset(&current) && !lost.is_empty() && current.len() - lost.len() >= target;
        if !fits {
            draft.facts.set(&site, truth);
            continue;
        }
        touched.insert(site.clone());
        faults.push(InjectedFault {
            kind: if replacement.is_some() {
                FaultKind::Discrepancy
            } else {
                FaultKind::Missing
            },
            target: site.to_string(),
            truth: truth.map(|f| f.to_string()),
            injected: replacement.map(|f| f.to_string()),
            checks: lost,
        });
        current = next;
    }
    faults
}

/// Generates a corpus. Deterministic in `config` and `catalog`.
pub fn generate(config: &GenConfig, catalog: &Catalog) -> Result<Corpus, String> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let typologies = config.typologies(&mut rng);
    let width = typologies.len().max(1).to_string().len().max(5);
    let mut drafts: Vec<Draft> = typologies
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let id = format!("app-{:0width$}", i + 1);
            let facts = generate_facts(&mut rng, &id, t);
            draft_files(&mut rng, facts, config.docs_per_app)
        })
        .collect();

    // Disallowed extensions: an exact share of all documents, drawn from direct uploads.
    let direct: Vec<(usize, String)> = drafts
        .iter()
        .enumerate()
        .flat_map(|(i, d)| {
            d.files.iter().filter_map(move |f| match f {
                Member::Direct { rel_path, .. } => Some((i, rel_path.clone())),
                Member::Archive { .. } => None,
            })
        })
        .collect();
    let total_docs = drafts.len() * config.docs_per_app;
    let n_unsupported = ((config.unsupported_rate * total_docs as f64) + 1e-9).floor() as usize;
    if n_unsupported > direct.len() {
        return Err(format!("unsupported rate {} needs more direct uploads than exist", config.unsupported_rate));
    }
    for k in index::sample(&mut rng, direct.len(), n_unsupported) {
        let (i, rel) = &direct[k];
        drafts[*i].unsupported.insert(rel.clone());
    }
    let extractable: Vec<(usize, String)> = drafts
        .iter()
        .enumerate()
        .flat_map(|(i, d)| {
            d.slots
                .keys()
                .filter(|rel| !d.unsupported.contains(*rel))
                .map(move |rel| (i, rel.clone()))
        })
        .collect();
    let n_failing = ((config.reading_error_rate * extractable.len() as f64) + 1e-9).floor() as usize;
    for k in index::sample(&mut rng, extractable.len(), n_failing) {
        let (i, rel) = &extractable[k];
        drafts[*i].failing.insert(rel.clone());
    }

    let mut budget = Budget {
        rate: config.consistency_rate,
        comparable: 0,
        consistent: 0,
    };
    let tol = catalog.amount_tolerance_cents;
    let mut apps = Vec::with_capacity(drafts.len());
    for mut draft in drafts {
        let baseline = statuses(catalog, &draft, tol);
        let k = baseline.values().filter(|s| **s != CheckStatus::NotApplicable).count();
        let target = budget.target(k);
        let mut faults = inject(&mut rng, catalog, &mut draft, target);
        let expected = statuses(catalog, &draft, tol);
        budget.comparable += k;
        budget.consistent += expected.values().filter(|s| **s == CheckStatus::AutoVerified).count();
        for rel in &draft.unsupported {
            faults.push(InjectedFault {
                kind: FaultKind::Unsupported,
                target: rel.clone(),
                truth: None,
                injected: None,
                checks: Vec::new(),
            });
        }
        for rel in &draft.failing {
            faults.push(InjectedFault {
                kind: FaultKind::ReadFailure,
                target: rel.clone(),
                truth: None,
                injected: None,
                checks: Vec::new(),
            });
        }
        let labels = expected
            .iter()
            .filter(|(_, s)| **s != CheckStatus::NotApplicable)
            .map(|(id, s)| {
                let real_error = baseline.get(id) == Some(&CheckStatus::AutoVerified) && *s != CheckStatus::AutoVerified;
                (id.clone(), Label { real_error, minor: false })
            })
            .collect();
        apps.push(render_app(&mut rng, &draft, faults, expected, labels));
    }
    Ok(Corpus {
        config: config.clone(),
        catalog_version: catalog.version.clone(),
        apps,
    })
}

fn render_app(
    rng: &mut ChaCha8Rng,
    draft: &Draft,
    faults: Vec<InjectedFault>,
    expected: BTreeMap<String, CheckStatus>,
    labels: BTreeMap<String, Label>,
) -> GeneratedApp {
    let facts = &draft.facts;
    let form_fields: Vec<_> = facts
        .form
        .iter()
        .map(|(name, f)| {
            let (kind, raw) = render_form(f);
            (name.clone(), kind, raw)
        })
        .collect();
    let form_xml = render_form_xml(&facts.app_id, &facts.typology, &form_fields);

    let mut per_report: BTreeMap<ReportKind, usize> = BTreeMap::new();
    for slot in draft.slots.values() {
        if let Some(kind) = cost_report(*slot) {
            *per_report.entry(kind).or_default() += 1;
        }
    }
    let mut files = Vec::new();
    for member in &draft.files {
        match member {
            Member::Archive { rel_path, members } => files.push(GeneratedFile {
                rel_path: rel_path.clone(),
                bytes: zip_bytes(&facts.app_id, rel_path, members),
                sidecar: None,
            }),
            Member::Direct { rel_path, ext } => {
                if draft.unsupported.contains(rel_path) {
                    let bad = disallowed(rel_path, ext);
                    files.push(GeneratedFile {
                        bytes: file_bytes(&facts.app_id, &bad, "other"),
                        rel_path: bad,
                        sidecar: None,
                    });
                    continue;
                }
                let sidecar = draft.slots.get(rel_path).map(|slot| {
                    let schema = schema_for(*slot, &facts.typology);
                    let tags = facts.docs.get(slot).cloned().unwrap_or_default();
                    let fields = schema
                        .tags
                        .iter()
                        .filter_map(|t| {
                            let fact = tags.get(&t.name)?;
                            Some((
                                t.name.clone(),
                                match fact {
                                    Some(f) => render_doc(rng, f),
                                    None => crate::extract::NONE_SENTINEL.to_string(),
                                },
                            ))
                        })
                        .collect();
                    let meta = cost_report(*slot)
                        .map(|k| cost_split(&facts.typology, k, per_report[&k]))
                        .unwrap_or_default();
                    Sidecar {
                        fields,
                        faults: if draft.failing.contains(rel_path) {
                            vec![Fault::Fail]
                        } else {
                            Vec::new()
                        },
                        meta,
                    }
                });
                files.push(GeneratedFile {
                    rel_path: rel_path.clone(),
                    bytes: file_bytes(&facts.app_id, rel_path, ext),
                    sidecar,
                });
            }
        }
    }
    GeneratedApp {
        app_id: facts.app_id.clone(),
        typology: facts.typology.clone(),
        form_xml,
        files,
        faults,
        expected,
        labels,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)
}

fn sidecar_text(s: &Sidecar) -> String {
    let mut text = serde_json::to_string_pretty(&s.to_json()).expect("json value");
    text.push('\n');
    text
}

impl GeneratedApp {
    pub fn document_count(&self) -> usize {
        self.files
            .iter()
            .map(|f| if f.rel_path.ends_with(".zip") { 2 } else { 1 })
            .sum()
    }

    fn write(&self, apps_dir: &Path) -> io::Result<()> {
        let dir = apps_dir.join(&self.app_id);
        write_file(&dir.join(crate::ingest::FORM_FILE), self.form_xml.as_bytes())?;
        for f in &self.files {
            write_file(&dir.join(&f.rel_path), &f.bytes)?;
            if let Some(s) = &f.sidecar {
                write_file(&dir.join(format!("{}{SIDECAR_SUFFIX}", f.rel_path)), sidecar_text(s).as_bytes())?;
            }
        }
        Ok(())
    }

    /// The bundle `load_corpus` would build from this application, with
    /// sidecars served from memory instead of disk.
    pub fn materialize(&self, policy: &FormatPolicy) -> Result<(ApplicationBundle, MemoryFixtures), String> {
        let parsed = parse_form_xml(self.form_xml.as_bytes()).map_err(|e| e.to_string())?;
        let mut documents = Vec::new();
        let mut unsupported = Vec::new();
        let mut archives = Vec::new();
        let mut fixtures = MemoryFixtures::default();
        for f in &self.files {
            let path = PathBuf::from(&f.rel_path);
            match policy.classify(&path) {
                Ok(FileKind::Zip) => {
                    let reader = zip::ZipArchive::new(io::Cursor::new(&f.bytes)).map_err(|e| e.to_string())?;
                    for name in reader.file_names() {
                        let rel_path = format!("{}/{name}", f.rel_path);
                        let kind = policy.classify(Path::new(name)).map_err(|r| r.to_string())?;
                        documents.push(DocumentRef {
                            path: path.clone(),
                            slot: infer_slot(&rel_path),
                            rel_path,
                            kind,
                            origin: Origin::ArchiveMember {
                                parent: f.rel_path.clone(),
                                member: name.to_string(),
                            },
                        });
                    }
                    archives.push(f.rel_path.clone());
                }
                Ok(kind) => {
                    if let Some(s) = &f.sidecar {
                        fixtures.insert(&f.rel_path, s.clone());
                    }
                    documents.push(DocumentRef {
                        path,
                        rel_path: f.rel_path.clone(),
                        kind,
                        slot: infer_slot(&f.rel_path),
                        origin: Origin::DirectUpload,
                    });
                }
                Err(reason) => unsupported.push(UnsupportedNotice::new(&path, f.rel_path.clone(), reason, None)),
            }
        }
        documents.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
        unsupported.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
        Ok((
            ApplicationBundle {
                app_id: parsed.app_id,
                dir: PathBuf::from(&self.app_id),
                typology: parsed.typology,
                form: parsed.form,
                documents,
                unsupported,
                archives,
            },
            fixtures,
        ))
    }
}

impl Corpus {
    pub fn totals(&self) -> CorpusTotals {
        let mut t = CorpusTotals {
            applications: self.apps.len(),
            documents: 0,
            unsupported_documents: 0,
            read_failures: 0,
            comparable_checks: 0,
            consistent_checks: 0,
        };
        for a in &self.apps {
            t.documents += a.document_count();
            for f in &a.faults {
                match f.kind {
                    FaultKind::Unsupported => t.unsupported_documents += 1,
                    FaultKind::ReadFailure => t.read_failures += 1,
                    _ => {}
                }
            }
            t.comparable_checks += a.expected.values().filter(|s| **s != CheckStatus::NotApplicable).count();
            t.consistent_checks += a.expected.values().filter(|s| **s == CheckStatus::AutoVerified).count();
        }
        t
    }

    pub fn labels(&self) -> Labels {
        let mut entries = BTreeMap::new();
        for a in &self.apps {
            for (check, l) in &a.labels {
                entries.insert((a.app_id.clone(), check.clone()), *l);
            }
        }
        Labels { entries }
    }

    /// Writes `apps/<app_id>/...`, `labels.csv` and `generator.json` under `out`.
    pub fn write(&self, out: &Path) -> io::Result<CorpusPaths> {
        let paths = CorpusPaths {
            apps: out.join("apps"),
            labels: out.join("labels.csv"),
            manifest: out.join("generator.json"),
        };
        std::fs::create_dir_all(&paths.apps)?;
        self.apps.par_iter().try_for_each(|a| a.write(&paths.apps))?;
        std::fs::write(&paths.labels, self.labels().to_csv())?;
        let manifest = GeneratorManifest {
            config: &self.config,
            catalog_version: &self.catalog_version,
            totals: self.totals(),
            applications: self
                .apps
                .iter()
                .map(|a| AppManifest {
                    app_id: &a.app_id,
                    typology: a.typology.to_string(),
                    faults: &a.faults,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::write(&paths.manifest, text)?;
        Ok(paths)
    }
}
