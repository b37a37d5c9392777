mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use common::*;
use symplanner::agents::{ChatClient, ChatMessage, RemoteConfig, RemoteError};

fn client(url: &str, retries: u32) -> ChatClient {
    ChatClient::new(RemoteConfig {
        base_url: url.into(),
        api_key_env: "SYMPLANNER_REMOTE_TEST_NO_KEY".into(),
        timeout_secs: 2.0,
        retries,
        backoff_ms: 1,
        ..RemoteConfig::default()
    })
    .unwrap()
}

fn ask(c: &ChatClient) -> Result<String, RemoteError> {
    c.chat(&[ChatMessage::user("hello")], &c.default_params())
}

#[test]
fn replies_come_back_verbatim() {
    let server = MockServer::start(|_| Reply::Content("\"Action 1\": \"Pick up the red block\"".into()));
    let c = client(&server.base_url, 0);
    assert_eq!(ask(&c).unwrap(), "\"Action 1\": \"Pick up the red block\"");
    let req = &server.requests()[0];
    assert_eq!(req["model"], "gpt-4.1");
    assert_eq!(req["temperature"].as_f64(), Some(0.7));
    assert_eq!(req["messages"][0]["content"], "hello");
}

#[test]
fn failures_are_distinct_errors() {
    let down = MockServer::start(|_| Reply::Status(500));
    assert!(matches!(ask(&client(&down.base_url, 0)), Err(RemoteError::Status { status: 500, .. })));

    let garbage = MockServer::start(|_| Reply::Raw("not json".into()));
    assert!(matches!(ask(&client(&garbage.base_url, 0)), Err(RemoteError::MalformedJson(_))));

    let empty = MockServer::start(|_| Reply::Raw("{\"choices\": []}".into()));
    assert!(matches!(ask(&client(&empty.base_url, 0)), Err(RemoteError::MalformedJson(_))));

    let hangup = MockServer::start(|_| Reply::Hangup);
    assert!(matches!(ask(&client(&hangup.base_url, 0)), Err(RemoteError::Transport(_))));
}

#[test]
fn transient_failures_are_retried_and_client_errors_are_not() {
    let seen = Arc::new(AtomicUsize::new(0));
    let counter = Arc::clone(&seen);
    let flaky = MockServer::start(move |_| {
        if counter.fetch_add(1, Ordering::SeqCst) < 2 {
            Reply::Status(503)
        } else {
            Reply::Content("ok".into())
        }
    });
    assert_eq!(ask(&client(&flaky.base_url, 3)).unwrap(), "ok");
    assert_eq!(flaky.requests().len(), 3);

    let down = MockServer::start(|_| Reply::Status(429));
    assert!(ask(&client(&down.base_url, 2)).is_err());
    assert_eq!(down.requests().len(), 3);

    let bad = MockServer::start(|_| Reply::Status(400));
    assert!(matches!(ask(&client(&bad.base_url, 5)), Err(RemoteError::Status { status: 400, .. })));
    assert_eq!(bad.requests().len(), 1);
}
