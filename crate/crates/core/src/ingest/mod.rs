//! Corpus loading: one directory per application holding `form.xml` and
//! its supporting documents.
//!
//! Every regular file under an application directory ends up in exactly
//! one place: a [`DocumentRef`], an [`UnsupportedNotice`], or the file list
//! of a [`LoadFailure`]. `form.xml` and `*.fields.json` fixture sidecars are
//! control files and are not documents.

mod archive;
mod classify;
mod form;
mod slots;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

pub use archive::{expand_archives, read_document_bytes, read_sidecar_bytes};
pub use classify::{classify_file, FileKind, FormatPolicy, DEFAULT_MAX_FILE_MB};
pub use form::{form_field_type, parse_declared, parse_form_xml, render_form_xml, DeclaredField, DeclaredType, FormData, FormError, FormXml};
pub use slots::{infer_slot, DocumentSlot};

use crate::typology::TypologyId;

pub const FORM_FILE: &str = "form.xml";
pub const SIDECAR_SUFFIX: &str = ".fields.json";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "origin", rename_all = "snake_case")]
pub enum Origin {
    DirectUpload,
    /// Member of an uploaded archive; `parent` is the archive's relative path.
    ArchiveMember { parent: String, member: String },
}

/// A supporting document. `path` is the on-disk file holding the bytes (the
/// archive itself for members); `rel_path` is relative to the application
/// directory, with archive members written `archive.zip/member`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRef {
    #[serde(skip)]
    pub path: PathBuf,
    pub rel_path: String,
    pub kind: FileKind,
    pub slot: DocumentSlot,
    #[serde(flatten)]
    pub origin: Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnsupportedReason {
    UnsupportedExtension,
    CorruptArchive,
    ArchiveDepthExceeded,
    Oversize,
}

impl fmt::Display for UnsupportedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnsupportedReason::UnsupportedExtension => "unsupported_extension",
            UnsupportedReason::CorruptArchive => "corrupt_archive",
            UnsupportedReason::ArchiveDepthExceeded => "archive_depth_exceeded",
            UnsupportedReason::Oversize => "oversize",
        })
    }
}

/// A file excluded from automated parsing; carried into every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsupportedNotice {
    #[serde(skip)]
    pub path: PathBuf,
    pub rel_path: String,
    pub reason: UnsupportedReason,
    pub slot: DocumentSlot,
    pub message: String,
}

impl UnsupportedNotice {
    pub fn new(path: &Path, rel_path: String, reason: UnsupportedReason, detail: Option<String>) -> Self {
        let base = match reason {
            UnsupportedReason::UnsupportedExtension => {
                format!("{rel_path}: file format not supported for automated parsing; verify manually")
            }
            UnsupportedReason::CorruptArchive => format!("{rel_path}: archive could not be opened; verify manually"),
            UnsupportedReason::ArchiveDepthExceeded => {
                format!("{rel_path}: archive nested inside an archive was not expanded; verify manually")
            }
            UnsupportedReason::Oversize => format!("{rel_path}: file exceeds the size limit; verify manually"),
        };
        let message = match detail {
            Some(d) => format!("{base} ({d})"),
            None => base,
        };
        Self {
            path: path.to_path_buf(),
            slot: infer_slot(&rel_path),
            rel_path,
            reason,
            message,
        }
    }
}

/// One application as loaded from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplicationBundle {
    pub app_id: String,
    pub dir: PathBuf,
    pub typology: TypologyId,
    pub form: FormData,
    pub documents: Vec<DocumentRef>,
    pub unsupported: Vec<UnsupportedNotice>,
    /// Archives already replaced by their members.
    pub archives: Vec<String>,
}

impl ApplicationBundle {
    /// Relative paths of every input file accounted for by this bundle.
    pub fn input_files(&self) -> Vec<String> {
        let mut files: Vec<String> = std::iter::once(FORM_FILE.to_string())
            .chain(self.archives.iter().cloned())
            .chain(
                self.documents
                    .iter()
                    .filter(|d| d.origin == Origin::DirectUpload)
                    .map(|d| d.rel_path.clone()),
            )
            .chain(
                self.unsupported
                    .iter()
                    .filter(|n| !self.archives.iter().any(|a| n.rel_path.starts_with(&format!("{a}/"))))
                    .map(|n| n.rel_path.clone()),
            )
            .collect();
        files.sort();
        files.dedup();
        files
    }
}

/// An application directory (or stray file) that could not be loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadFailure {
    pub app_id: Option<String>,
    pub rel_path: String,
    pub diagnostic: String,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusScan {
    pub bundles: Vec<ApplicationBundle>,
    pub failures: Vec<LoadFailure>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("corpus root {path} is not readable: {source}")]
    UnreadableRoot {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Lists the regular files under `dir`, relative to it, sorted.
fn walk_files(dir: &Path) -> Result<Vec<(String, PathBuf, u64)>, String> {
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).follow_links(false).sort_by_file_name() {
        let entry = entry.map_err(|e| e.to_string())?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(dir)
            .map_err(|e| e.to_string())?
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        let size = entry.metadata().map_err(|e| e.to_string())?.len();
        out.push((rel, entry.path().to_path_buf(), size));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn scan_application(app_id: &str, dir: &Path, policy: &FormatPolicy) -> Result<ApplicationBundle, LoadFailure> {
    let fail = |diagnostic: String, files: Vec<String>| LoadFailure {
        app_id: Some(app_id.to_string()),
        rel_path: app_id.to_string(),
        diagnostic,
        files,
    };
    let files = walk_files(dir).map_err(|e| fail(format!("unreadable application directory: {e}"), Vec::new()))?;
    let all_rel: Vec<String> = files.iter().map(|f| f.0.clone()).collect();
    let rel_set: BTreeSet<&str> = all_rel.iter().map(String::as_str).collect();

    let form_path = dir.join(FORM_FILE);
    if !rel_set.contains(FORM_FILE) {
        return Err(fail(format!("missing {FORM_FILE}"), all_rel));
    }
    let form_bytes = std::fs::read(&form_path).map_err(|e| fail(format!("cannot read {FORM_FILE}: {e}"), all_rel.clone()))?;
    let parsed = parse_form_xml(&form_bytes).map_err(|e| fail(e.to_string(), all_rel.clone()))?;
    if parsed.app_id != app_id {
        return Err(fail(
            format!("{FORM_FILE} id {:?} does not match directory name {app_id:?}", parsed.app_id),
            all_rel,
        ));
    }
    let missing: Vec<&str> = parsed
        .typology
        .mandatory_fields()
        .into_iter()
        .filter(|f| parsed.form.get(f).is_none())
        .collect();
    if !missing.is_empty() {
        return Err(fail(
            format!(
                "missing mandatory field(s) for typology {}: {}",
                parsed.typology,
                missing.join(", ")
            ),
            all_rel,
        ));
    }

    let mut documents = Vec::new();
    let mut unsupported = Vec::new();
    for (rel, path, size) in files {
        if rel == FORM_FILE {
            continue;
        }
        if let Some(base) = rel.strip_suffix(SIDECAR_SUFFIX) {
            if rel_set.contains(base) {
                continue;
            }
        }
        let classified = policy.classify(&path).and_then(|kind| {
            if size > policy.max_file_bytes {
                Err(UnsupportedReason::Oversize)
            } else {
                Ok(kind)
            }
        });
        match classified {
            Ok(kind) => documents.push(DocumentRef {
                path,
                rel_path: rel,
                kind,
                slot: DocumentSlot::Other,
                origin: Origin::DirectUpload,
            }),
            Err(reason) => unsupported.push(UnsupportedNotice::new(&path, rel, reason, None)),
        }
    }
    Ok(ApplicationBundle {
        app_id: app_id.to_string(),
        dir: dir.to_path_buf(),
        typology: parsed.typology,
        form: parsed.form,
        documents,
        unsupported,
        archives: Vec::new(),
    })
}

fn list_root(root: &Path) -> Result<(Vec<(String, PathBuf)>, Vec<String>), IngestError> {
    let unreadable = |source| IngestError::UnreadableRoot {
        path: root.to_path_buf(),
        source,
    };
    let mut dirs = Vec::new();
    let mut stray = Vec::new();
    for entry in std::fs::read_dir(root).map_err(unreadable)? {
        let entry = entry.map_err(unreadable)?;
        let ft = entry.file_type().map_err(unreadable)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if ft.is_dir() {
            dirs.push((name, entry.path()));
        } else if ft.is_file() {
            stray.push(name);
        }
    }
    dirs.sort();
    stray.sort();
    Ok((dirs, stray))
}

fn stray_failures(stray: Vec<String>) -> Vec<LoadFailure> {
    stray
        .into_iter()
        .map(|name| LoadFailure {
            app_id: None,
            rel_path: name.clone(),
            diagnostic: "file outside any application directory".to_string(),
            files: vec![name],
        })
        .collect()
}

/// One bundle per application directory, ordered by app id. Directories
/// that fail to load are reported in [`CorpusScan::failures`] and the scan
/// continues. Archives are not expanded and slots are not yet assigned.
pub fn scan_corpus(root: &Path, policy: &FormatPolicy) -> Result<CorpusScan, IngestError> {
    scan_with(root, policy, |b| b)
}

/// [`scan_corpus`] followed by [`expand_archives`] and [`map_documents`].
pub fn load_corpus(root: &Path, policy: &FormatPolicy) -> Result<CorpusScan, IngestError> {
    scan_with(root, policy, |b| map_documents(expand_archives(b, policy)))
}

fn scan_with(
    root: &Path,
    policy: &FormatPolicy,
    finish: impl Fn(ApplicationBundle) -> ApplicationBundle + Sync,
) -> Result<CorpusScan, IngestError> {
    let (dirs, stray) = list_root(root)?;
    let results: Vec<Result<ApplicationBundle, LoadFailure>> = dirs
        .par_iter()
        .map(|(app_id, dir)| scan_application(app_id, dir, policy).map(&finish))
        .collect();
    let mut scan = CorpusScan {
        bundles: Vec::with_capacity(results.len()),
        failures: stray_failures(stray),
    };
    for r in results {
        match r {
            Ok(b) => scan.bundles.push(b),
            Err(f) => scan.failures.push(f),
        }
    }
    Ok(scan)
}

/// Assigns every document and notice a slot via [`infer_slot`].
pub fn map_documents(mut bundle: ApplicationBundle) -> ApplicationBundle {
    for doc in &mut bundle.documents {
        doc.slot = infer_slot(&doc.rel_path);
    }
    for notice in &mut bundle.unsupported {
        notice.slot = infer_slot(&notice.rel_path);
    }
    bundle
}
