use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use hde_backend::{Backend, BackendError, GenerationRequest, LabeledTurn, RemoteBackend, RemoteConfig};

/// Serves one canned `(status, body)` per connection and keeps the request
/// bodies it saw.
fn mock(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (status, body) in responses {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream);
            let mut length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let mut buf = vec![0; length];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(String::from_utf8(buf).unwrap());
            let mut stream = reader.into_inner();
            let reply = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (url, seen)
}

fn completion(text: &str, finish: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}, "finish_reason": finish}]}).to_string()
}

fn config(url: &str) -> RemoteConfig {
    let mut c = RemoteConfig::new(url, "test-model");
    c.backoff_base_ms = 5;
    c.timeout_s = 5;
    c
}

fn request() -> GenerationRequest {
    let mut r = GenerationRequest::new("be Kant", "[debate t01 kant] reply");
    r.context_window.push(LabeledTurn {
        label: "mill (team B)".into(),
        text: "utility decides".into(),
    });
    r
}

#[test]
fn sends_chat_completion_shape() {
    let (url, seen) = mock(vec![(200, completion(" Duty first. ", "stop"))]);
    let backend = RemoteBackend::new(config(&url)).unwrap();
    let out = backend.generate(&request()).unwrap();
    assert_eq!(out.text, "Duty first.");
    assert!(!out.truncated);
    assert_eq!(out.backend_id, "remote:test-model");
    let body: serde_json::Value = serde_json::from_str(&seen.lock().unwrap()[0]).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], "mill (team B): utility decides");
    assert_eq!(body["messages"][2]["content"], "[debate t01 kant] reply");
    assert_eq!(body["temperature"], 0.2);
}

#[test]
fn retries_transient_failures() {
    let (url, seen) = mock(vec![
        (503, "{}".into()),
        (429, "{}".into()),
        (200, completion("ok", "length")),
    ]);
    let out = RemoteBackend::new(config(&url)).unwrap().generate(&request()).unwrap();
    assert_eq!(out.text, "ok");
    assert!(out.truncated);
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn gives_up_after_three_attempts_with_last_status() {
    let (url, seen) = mock(vec![(500, "a".into()), (502, "b".into()), (503, "c".into()), (200, completion("late", "stop"))]);
    let err = RemoteBackend::new(config(&url)).unwrap().generate(&request()).unwrap_err();
    match err {
        BackendError::Exhausted { attempts, last_status, .. } => {
            assert_eq!(attempts, 3);
            assert_eq!(last_status, Some(503));
        }
        other => panic!("unexpected {other}"),
    }
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen) = mock(vec![(400, "bad".into()), (200, completion("no", "stop"))]);
    let err = RemoteBackend::new(config(&url)).unwrap().generate(&request()).unwrap_err();
    assert!(matches!(err, BackendError::Rejected { status: 400, .. }));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn unreachable_host_fails_after_retries() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let url = format!("http://127.0.0.1:{port}/v1/chat/completions");
    let started = Instant::now();
    let err = RemoteBackend::new(config(&url)).unwrap().generate(&request()).unwrap_err();
    assert!(matches!(err, BackendError::Exhausted { attempts: 3, last_status: None, .. }), "{err}");
    // two backoff sleeps: 5ms then 10ms
    assert!(started.elapsed() >= Duration::from_millis(15));
}

#[test]
fn malformed_body_is_an_error() {
    let (url, _) = mock(vec![(200, "{\"choices\": []}".into())]);
    let err = RemoteBackend::new(config(&url)).unwrap().generate(&request()).unwrap_err();
    assert!(matches!(err, BackendError::Malformed(_)));
}

#[test]
fn missing_api_key_variable_is_reported() {
    let mut c = config("http://127.0.0.1:1/");
    c.api_key_env = Some("HDE_TEST_KEY_THAT_IS_NOT_SET".into());
    assert!(matches!(RemoteBackend::new(c), Err(BackendError::MissingApiKey(_))));
}
