//! Loading corpora from directories and line-files.

use std::fs;
use std::path::Path;

use solmetrics::corpus::{load_corpus, CorpusError};
use tempfile::TempDir;

fn addr(c: char) -> String {
    c.to_string().repeat(40)
}

fn write(dir: &Path, name: &str, contents: &str) {
    fs::write(dir.join(name), contents).unwrap();
}

#[test]
fn directory_mode_reads_optional_siblings() {
    let dir = TempDir::new().unwrap();
    let a = addr('a');
    write(dir.path(), &format!("{a}.sol"), "contract A {}");
    write(
        dir.path(),
        &format!("{a}.abi.json"),
        "[{\"type\":\"function\"}]",
    );
    write(dir.path(), &format!("{a}.bin"), "0x60FF\n");
    let b = addr('b');
    write(dir.path(), &format!("{b}.sol"), "contract B {}");

    let corpus = load_corpus(dir.path(), false).unwrap();
    assert_eq!(corpus.len(), 2);
    let first = &corpus.records()[0];
    assert_eq!(first.address.as_str(), a);
    assert_eq!(first.abi_json.as_deref(), Some("[{\"type\":\"function\"}]"));
    assert_eq!(first.bytecode_hex.as_deref(), Some("60ff"));
    let second = &corpus.records()[1];
    assert_eq!(second.abi_json, None);
    assert_eq!(second.bytecode_hex, None);
}

#[test]
fn directory_dedup_keeps_one_of_identical_sources() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), &format!("{}.sol", addr('a')), "contract X {}");
    write(dir.path(), &format!("{}.sol", addr('b')), "contract X {}");

    let deduped = load_corpus(dir.path(), true).unwrap();
    assert_eq!(deduped.len(), 1);
    assert_eq!(deduped.duplicates_removed(), 1);
    assert!(deduped.dedup_applied());
    assert_eq!(deduped.records()[0].address.as_str(), addr('a'));

    let plain = load_corpus(dir.path(), false).unwrap();
    assert_eq!(plain.len(), 2);
    assert_eq!(plain.duplicates_removed(), 0);
    assert!(!plain.dedup_applied());
}

#[test]
fn line_file_single_record() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("corpus.jsonl");
    fs::write(
        &path,
        format!(
            "{{\"address\":\"{}\",\"source\":\"contract A {{}}\"}}\n",
            addr('a')
        ),
    )
    .unwrap();
    let corpus = load_corpus(&path, false).unwrap();
    assert_eq!(corpus.len(), 1);
    let record = &corpus.records()[0];
    assert_eq!(record.source, "contract A {}");
    assert_eq!(record.abi_json, None);
    assert_eq!(record.bytecode_hex, None);
}

#[test]
fn line_file_full_record_and_normalization() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("corpus.jsonl");
    let a = addr('a').to_uppercase();
    fs::write(
        &path,
        format!(
            "{{\"address\":\"0x{a}\",\"source\":\"contract A {{}}\",\"abi\":\"[]\",\"bytecode\":\"0xAB\"}}\n"
        ),
    )
    .unwrap();
    let corpus = load_corpus(&path, false).unwrap();
    let record = &corpus.records()[0];
    assert_eq!(record.address.as_str(), addr('a'));
    assert_eq!(record.abi_json.as_deref(), Some("[]"));
    assert_eq!(record.bytecode_hex.as_deref(), Some("ab"));
}

#[test]
fn malformed_address_is_rejected_with_diagnostic() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "not-an-address.sol", "contract A {}");
    write(dir.path(), &format!("{}.sol", addr('a')), "contract B {}");

    let corpus = load_corpus(dir.path(), false).unwrap();
    assert_eq!(corpus.len(), 1);
    assert_eq!(corpus.diagnostics().len(), 1);
    assert!(corpus.diagnostics()[0].contains("not-an-address"));
}

#[test]
fn malformed_json_line_is_skipped_with_diagnostic() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("corpus.jsonl");
    fs::write(
        &path,
        format!(
            "not json at all\n{{\"address\":\"{}\",\"source\":\"contract A {{}}\"}}\n",
            addr('a')
        ),
    )
    .unwrap();
    let corpus = load_corpus(&path, false).unwrap();
    assert_eq!(corpus.len(), 1);
    assert_eq!(corpus.diagnostics().len(), 1);
}

#[test]
fn invalid_bytecode_is_dropped_not_fatal() {
    let dir = TempDir::new().unwrap();
    let a = addr('a');
    write(dir.path(), &format!("{a}.sol"), "contract A {}");
    write(dir.path(), &format!("{a}.bin"), "0x123"); // odd length

    let corpus = load_corpus(dir.path(), false).unwrap();
    assert_eq!(corpus.len(), 1);
    assert_eq!(corpus.records()[0].bytecode_hex, None);
    assert_eq!(corpus.diagnostics().len(), 1);
}

#[test]
fn zero_valid_records_is_fatal() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bogus.sol", "contract A {}");
    match load_corpus(dir.path(), false) {
        Err(CorpusError::Empty { .. }) => {}
        other => panic!("expected Empty, got {other:?}"),
    }
}

#[test]
fn unreadable_path_is_fatal_and_names_it() {
    let missing = Path::new("/nonexistent/corpus/path");
    match load_corpus(missing, false) {
        Err(CorpusError::Io { path, .. }) => assert_eq!(path, missing),
        other => panic!("expected Io, got {other:?}"),
    }
}

#[test]
fn loading_is_idempotent() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), &format!("{}.sol", addr('a')), "contract A {}");
    write(dir.path(), &format!("{}.sol", addr('b')), "contract A {}");
    write(dir.path(), &format!("{}.sol", addr('c')), "contract C {}");

    let first = load_corpus(dir.path(), true).unwrap();
    let second = load_corpus(dir.path(), true).unwrap();
    assert_eq!(first.records(), second.records());
    assert_eq!(first.duplicates_removed(), second.duplicates_removed());
}

#[test]
fn line_file_dedup_is_input_order_independent() {
    let dir = TempDir::new().unwrap();
    let rec = |c: char, src: &str| format!("{{\"address\":\"{}\",\"source\":\"{src}\"}}", addr(c));
    let forward = dir.path().join("forward.jsonl");
    fs::write(
        &forward,
        format!(
            "{}\n{}\n{}\n",
            rec('a', "same"),
            rec('b', "same"),
            rec('c', "other")
        ),
    )
    .unwrap();
    let backward = dir.path().join("backward.jsonl");
    fs::write(
        &backward,
        format!(
            "{}\n{}\n{}\n",
            rec('c', "other"),
            rec('b', "same"),
            rec('a', "same")
        ),
    )
    .unwrap();

    let f = load_corpus(&forward, true).unwrap();
    let b = load_corpus(&backward, true).unwrap();
    assert_eq!(f.records(), b.records());
    assert_eq!(f.duplicates_removed(), 1);
}

#[test]
fn uppercase_prefixed_filenames_normalize() {
    let dir = TempDir::new().unwrap();
    let upper = format!("0x{}", addr('a').to_uppercase());
    write(dir.path(), &format!("{upper}.sol"), "contract A {}");
    let corpus = load_corpus(dir.path(), false).unwrap();
    assert_eq!(corpus.records()[0].address.as_str(), addr('a'));
}
