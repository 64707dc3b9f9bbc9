use std::time::Duration;

use reclaim_core::extract::stub::{StubIndex, StubOptions, StubServer};
use reclaim_core::extract::{extract, schema_for, ExtractedValue, MockBackend, RemoteBackend, RemoteConfig, UnreadableReason};
use reclaim_core::ingest::{load_corpus, DocumentSlot, FormatPolicy};
use reclaim_core::rules::Catalog;
use reclaim_core::synth::{generate, GenConfig};

fn corpus(n: usize) -> (tempfile::TempDir, std::path::PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = GenConfig {
        seed: 21,
        n_apps: n,
        ..GenConfig::default()
    };
    let apps = generate(&cfg, &Catalog::builtin()).unwrap().write(tmp.path()).unwrap().apps;
    (tmp, apps)
}

fn remote(server: &StubServer) -> RemoteBackend {
    let mut cfg = RemoteConfig::new(server.url().clone());
    cfg.backoff = Duration::from_millis(1);
    cfg.timeout = Duration::from_secs(5);
    RemoteBackend::new(cfg).unwrap()
}

#[test]
fn healthy_stub_matches_mock() {
    let (_tmp, apps) = corpus(3);
    let policy = FormatPolicy::default();
    let server = StubServer::start(StubIndex::from_corpus(&apps, &policy).unwrap(), StubOptions::default()).unwrap();
    let remote = remote(&server);
    let mock = MockBackend::disk();
    let scan = load_corpus(&apps, &policy).unwrap();
    let mut compared = 0;
    for b in &scan.bundles {
        for d in &b.documents {
            let schema = schema_for(d.slot, &b.typology);
            let via_mock = extract(d, &schema, &mock);
            let via_http = extract(d, &schema, &remote);
            assert_eq!(via_mock.fields, via_http.fields, "{}", d.rel_path);
            assert_eq!(via_mock.doc_class, via_http.doc_class);
            compared += usize::from(!schema.is_empty());
        }
    }
    assert!(compared > 0);
    assert_eq!(server.request_count(), compared);
}

#[test]
fn server_errors_exhaust_retries() {
    let (_tmp, apps) = corpus(1);
    let policy = FormatPolicy::default();
    let options = StubOptions {
        force_status: Some(500),
        ..StubOptions::default()
    };
    let server = StubServer::start(StubIndex::default(), options).unwrap();
    let backend = remote(&server);
    let scan = load_corpus(&apps, &policy).unwrap();
    let b = &scan.bundles[0];
    let invoice = b.documents.iter().find(|d| d.slot == DocumentSlot::Invoice).unwrap();
    let out = extract(invoice, &schema_for(invoice.slot, &b.typology), &backend);
    assert!(!out.fields.is_empty());
    for v in out.fields.values() {
        assert_eq!(
            v,
            &ExtractedValue::Unreadable {
                reason: UnreadableReason::BackendError,
                raw: None
            }
        );
    }
    assert_eq!(server.request_count(), 3);
}

#[test]
fn omitted_tag_is_absent_and_others_survive() {
    let (_tmp, apps) = corpus(1);
    let policy = FormatPolicy::default();
    let options = StubOptions {
        omit_tags: ["total_value".to_string()].into_iter().collect(),
        ..StubOptions::default()
    };
    let server = StubServer::start(StubIndex::from_corpus(&apps, &policy).unwrap(), options).unwrap();
    let backend = remote(&server);
    let scan = load_corpus(&apps, &policy).unwrap();
    let b = &scan.bundles[0];
    let invoice = b.documents.iter().find(|d| d.slot == DocumentSlot::Invoice).unwrap();
    let schema = schema_for(invoice.slot, &b.typology);
    let via_http = extract(invoice, &schema, &backend);
    let via_mock = extract(invoice, &schema, &MockBackend::disk());
    assert_eq!(via_http.fields["total_value"], ExtractedValue::Absent);
    assert!(matches!(via_mock.fields["total_value"], ExtractedValue::Present { .. }));
    for (tag, v) in &via_mock.fields {
        if tag != "total_value" {
            assert_eq!(&via_http.fields[tag], v, "{tag}");
        }
    }
}

#[test]
fn unknown_document_gets_none_everywhere() {
    let (_tmp, apps) = corpus(1);
    let policy = FormatPolicy::default();
    let server = StubServer::start(StubIndex::default(), StubOptions::default()).unwrap();
    let backend = remote(&server);
    let b = &load_corpus(&apps, &policy).unwrap().bundles[0];
    let invoice = b.documents.iter().find(|d| d.slot == DocumentSlot::Invoice).unwrap();
    let out = extract(invoice, &schema_for(invoice.slot, &b.typology), &backend);
    assert!(out.fields.values().all(|v| *v == ExtractedValue::Absent));
}
