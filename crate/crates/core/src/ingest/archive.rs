use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use zip::ZipArchive;

use super::{
    ApplicationBundle, DocumentRef, FileKind, FormatPolicy, Origin, UnsupportedNotice, UnsupportedReason,
    SIDECAR_SUFFIX,
};
use crate::ingest::slots::DocumentSlot;

struct Member {
    name: String,
    size: u64,
}

fn list_members(path: &Path) -> Result<Vec<Member>, String> {
    let file = File::open(path).map_err(|e| e.to_string())?;
    let mut archive = ZipArchive::new(file).map_err(|e| e.to_string())?;
    let mut members = Vec::with_capacity(archive.len());
    for i in 0..archive.len() {
        let entry = archive.by_index_raw(i).map_err(|e| e.to_string())?;
        if entry.is_dir() {
            continue;
        }
        let Some(name) = entry.enclosed_name() else {
            return Err(format!("member {:?} escapes the archive root", entry.name()));
        };
        let name = name.to_string_lossy().replace('\\', "/");
        members.push(Member {
            name,
            size: entry.size(),
        });
    }
    members.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(members)
}

/// Replaces every ZIP document by its members (re-classified), one level
/// deep. Nested archives, corrupt archives and oversize members become
/// notices. A bundle without archives comes back unchanged.
pub fn expand_archives(mut bundle: ApplicationBundle, policy: &FormatPolicy) -> ApplicationBundle {
    let (zips, mut documents): (Vec<DocumentRef>, Vec<DocumentRef>) =
        bundle.documents.into_iter().partition(|d| d.kind == FileKind::Zip);
    for zip in zips {
        match list_members(&zip.path) {
            Err(e) => bundle.unsupported.push(UnsupportedNotice::new(
                &zip.path,
                zip.rel_path.clone(),
                UnsupportedReason::CorruptArchive,
                Some(e),
            )),
            Ok(members) => {
                let names: BTreeSet<&str> = members.iter().map(|m| m.name.as_str()).collect();
                for member in &members {
                    if let Some(base) = member.name.strip_suffix(SIDECAR_SUFFIX) {
                        if names.contains(base) {
                            continue;
                        }
                    }
                    let rel_path = format!("{}/{}", zip.rel_path, member.name);
                    let outcome = match policy.classify(Path::new(&member.name)) {
                        Ok(FileKind::Zip) => Err(UnsupportedReason::ArchiveDepthExceeded),
                        Ok(_) if member.size > policy.max_file_bytes => Err(UnsupportedReason::Oversize),
                        other => other,
                    };
                    match outcome {
                        Ok(kind) => documents.push(DocumentRef {
                            path: zip.path.clone(),
                            rel_path,
                            kind,
                            slot: DocumentSlot::Other,
                            origin: Origin::ArchiveMember {
                                parent: zip.rel_path.clone(),
                                member: member.name.clone(),
                            },
                        }),
                        Err(reason) => bundle
                            .unsupported
                            .push(UnsupportedNotice::new(&zip.path, rel_path, reason, None)),
                    }
                }
                bundle.archives.push(zip.rel_path.clone());
            }
        }
    }
    documents.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
    bundle.unsupported.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
    bundle.documents = documents;
    bundle
}

fn read_member(zip_path: &Path, member: &str) -> io::Result<Option<Vec<u8>>> {
    let file = File::open(zip_path)?;
    let mut archive = ZipArchive::new(file).map_err(io::Error::other)?;
    let mut entry = match archive.by_name(member) {
        Ok(e) => e,
        Err(zip::result::ZipError::FileNotFound) => return Ok(None),
        Err(e) => return Err(io::Error::other(e)),
    };
    let mut buf = Vec::with_capacity(entry.size() as usize);
    entry.read_to_end(&mut buf)?;
    Ok(Some(buf))
}

/// Raw bytes of a document, reading through the parent archive for members.
pub fn read_document_bytes(doc: &DocumentRef) -> io::Result<Vec<u8>> {
    match &doc.origin {
        Origin::DirectUpload => std::fs::read(&doc.path),
        Origin::ArchiveMember { member, .. } => read_member(&doc.path, member)?
            .ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, format!("member {member} not in archive"))),
    }
}

/// The `<docfile>.fields.json` fixture next to a document, if any.
pub fn read_sidecar_bytes(doc: &DocumentRef) -> io::Result<Option<Vec<u8>>> {
    match &doc.origin {
        Origin::DirectUpload => {
            let mut name = doc.path.as_os_str().to_owned();
            name.push(SIDECAR_SUFFIX);
            match std::fs::read(Path::new(&name)) {
                Ok(b) => Ok(Some(b)),
                Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(e),
            }
        }
        Origin::ArchiveMember { member, .. } => read_member(&doc.path, &format!("{member}{SIDECAR_SUFFIX}")),
    }
}
