//! Fetcher behavior against a local single-threaded HTTP server serving
//! canned Etherscan-style responses.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;
use std::time::{Duration, Instant};

use solmetrics::corpus::fetch::{fetch_contracts, FetchConfig, FetchError};
use solmetrics::corpus::Address;

/// Serves one canned response per incoming connection, in order, then
/// returns the observed request lines.
fn serve(responses: Vec<(u16, String)>) -> (String, thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base_url = format!("http://{}", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let mut requests = Vec::new();
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            requests.push(request_line.trim_end().to_string());
            let mut stream = reader.into_inner();
            let reason = if status == 200 { "OK" } else { "Error" };
            write!(
                stream,
                "HTTP/1.1 {status} {reason}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            stream.flush().unwrap();
        }
        requests
    });
    (base_url, handle)
}

fn verified_body(source: &str, abi: &str) -> String {
    format!(
        "{{\"status\":\"1\",\"message\":\"OK\",\"result\":[{{\"SourceCode\":\"{source}\",\"ABI\":\"{abi}\",\"ContractName\":\"A\"}}]}}"
    )
}

fn unverified_body() -> String {
    "{\"status\":\"1\",\"message\":\"OK\",\"result\":[{\"SourceCode\":\"\",\"ABI\":\"Contract source code not verified\"}]}".to_string()
}

fn config(base_url: &str) -> FetchConfig {
    let mut config = FetchConfig::new("testkey");
    config.base_url = base_url.to_string();
    config.rate_limit = 1000.0;
    config.timeout = Duration::from_secs(5);
    config.retry_backoff = Duration::from_millis(1);
    config
}

fn addr(c: char) -> Address {
    Address::parse(&c.to_string().repeat(40)).unwrap()
}

#[test]
fn verified_contract_is_fetched_with_query_params() {
    let (base_url, server) = serve(vec![(200, verified_body("contract A {}", "[]"))]);
    let report = fetch_contracts(&[addr('a')], &config(&base_url)).unwrap();
    assert_eq!(report.records.len(), 1);
    assert!(report.diagnostics.is_empty());
    let record = &report.records[0];
    assert_eq!(record.source, "contract A {}");
    assert_eq!(record.abi_json.as_deref(), Some("[]"));
    assert_eq!(record.bytecode_hex, None);
    assert!(record.retrieved_at.is_some());

    let requests = server.join().unwrap();
    assert_eq!(requests.len(), 1);
    let line = &requests[0];
    assert!(line.starts_with("GET "), "{line}");
    assert!(line.contains("module=contract"), "{line}");
    assert!(line.contains("action=getsourcecode"), "{line}");
    assert!(
        line.contains(&format!("address=0x{}", "a".repeat(40))),
        "{line}"
    );
    assert!(line.contains("apikey=testkey"), "{line}");
}

#[test]
fn unverified_address_is_skipped_with_diagnostic() {
    let (base_url, server) = serve(vec![(200, unverified_body())]);
    let report = fetch_contracts(&[addr('b')], &config(&base_url)).unwrap();
    assert!(report.records.is_empty());
    assert_eq!(report.diagnostics.len(), 1);
    assert!(report.diagnostics[0].contains("not verified"));
    server.join().unwrap();
}

#[test]
fn invalid_api_key_is_fatal() {
    let body = "{\"status\":\"0\",\"message\":\"NOTOK\",\"result\":\"Invalid API Key\"}";
    let (base_url, server) = serve(vec![(200, body.to_string())]);
    let err = fetch_contracts(&[addr('c')], &config(&base_url)).unwrap_err();
    assert!(matches!(err, FetchError::InvalidApiKey));
    server.join().unwrap();
}

#[test]
fn http_failure_is_retried_then_skipped() {
    // Initial attempt plus three retries, all failing.
    let responses = vec![(500, "boom".to_string()); 4];
    let (base_url, server) = serve(responses);
    let report = fetch_contracts(&[addr('d')], &config(&base_url)).unwrap();
    assert!(report.records.is_empty());
    assert_eq!(report.diagnostics.len(), 1);
    assert!(report.diagnostics[0].contains("after 3 retries"));
    assert_eq!(server.join().unwrap().len(), 4);
}

#[test]
fn transient_failure_recovers_on_retry() {
    let responses = vec![
        (500, "boom".to_string()),
        (200, verified_body("contract A {}", "[]")),
    ];
    let (base_url, server) = serve(responses);
    let report = fetch_contracts(&[addr('e')], &config(&base_url)).unwrap();
    assert_eq!(report.records.len(), 1);
    assert!(report.diagnostics.is_empty());
    assert_eq!(server.join().unwrap().len(), 2);
}

#[test]
fn ten_addresses_at_rate_four_take_at_least_nine_quarters_of_a_second() {
    let responses = vec![(200, verified_body("contract A {}", "[]")); 10];
    let (base_url, server) = serve(responses);
    let addresses: Vec<Address> = (0..10)
        .map(|i| Address::parse(&format!("{i:040x}")).unwrap())
        .collect();
    let mut config = config(&base_url);
    config.rate_limit = 4.0;

    let start = Instant::now();
    let report = fetch_contracts(&addresses, &config).unwrap();
    let elapsed = start.elapsed();

    assert_eq!(report.records.len(), 10);
    // Nine inter-request gaps at 250 ms each.
    assert!(
        elapsed >= Duration::from_millis(2250),
        "finished too fast: {elapsed:?}"
    );
    server.join().unwrap();
}
