use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::UnsupportedReason;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileKind {
    Pdf,
    Zip,
    Jpg,
    Png,
}

impl FileKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FileKind::Pdf => "pdf",
            FileKind::Zip => "zip",
            FileKind::Jpg => "jpg",
            FileKind::Png => "png",
        }
    }
}

impl fmt::Display for FileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pdf" => Ok(FileKind::Pdf),
            "zip" => Ok(FileKind::Zip),
            "jpg" | "jpeg" => Ok(FileKind::Jpg),
            "png" => Ok(FileKind::Png),
            other => Err(format!("unknown file kind {other:?}")),
        }
    }
}

/// Which extensions are accepted and how large a file may be.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormatPolicy {
    pub max_file_bytes: u64,
    /// Additional extensions, each mapped onto the kind sent to the backend.
    pub extra_extensions: BTreeMap<String, FileKind>,
}

pub const DEFAULT_MAX_FILE_MB: u64 = 25;

impl Default for FormatPolicy {
    fn default() -> Self {
        Self {
            max_file_bytes: DEFAULT_MAX_FILE_MB * 1024 * 1024,
            extra_extensions: BTreeMap::new(),
        }
    }
}

impl FormatPolicy {
    /// Parses an `--allow-ext` list such as `tif:png,heic:jpg`.
    pub fn with_allowed(mut self, csv: &str) -> Result<Self, String> {
        for entry in csv.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (ext, kind) = entry
                .split_once(':')
                .ok_or_else(|| format!("--allow-ext entry {entry:?} must be ext:kind (kind one of pdf, jpg, png, zip)"))?;
            let ext = ext.trim().trim_start_matches('.').to_ascii_lowercase();
            if ext.is_empty() {
                return Err(format!("--allow-ext entry {entry:?} has an empty extension"));
            }
            self.extra_extensions.insert(ext, kind.trim().parse()?);
        }
        Ok(self)
    }

    pub fn classify(&self, path: &Path) -> Result<FileKind, UnsupportedReason> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "pdf" => Ok(FileKind::Pdf),
            "zip" => Ok(FileKind::Zip),
            "jpg" | "jpeg" => Ok(FileKind::Jpg),
            "png" => Ok(FileKind::Png),
            other => self
                .extra_extensions
                .get(other)
                .copied()
                .ok_or(UnsupportedReason::UnsupportedExtension),
        }
    }
}

/// Extension-based, case-insensitive classification under the default policy.
pub fn classify_file(path: &Path) -> Result<FileKind, UnsupportedReason> {
    FormatPolicy::default().classify(path)
}
