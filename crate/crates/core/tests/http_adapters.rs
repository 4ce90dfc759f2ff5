//! The HTTP surfaces exercised against a local scripted server: encoder
//! embedding, external detector train/eval, toxicity scoring, and the
//! chat-completions client.

mod common;

use common::TestServer;

use ctt_core::corpus::{BalancedSet, Label};
use ctt_core::detector::ExternalDetector;
use ctt_core::encoder::{Encoder, EncoderError, HttpEncoder};
use ctt_core::genharness::{ChatClient, ChatMessage, ChatRequest, EndpointConfig};
use ctt_core::textfeat::{HttpToxicity, ToxicityScorer};

#[test]
fn http_encoder_round_trip() {
    let server = TestServer::start(
        1,
        Box::new(|path, body| {
            assert_eq!(path, "/embed");
            let parsed: serde_json::Value = serde_json::from_str(body).unwrap();
            let texts = parsed["texts"].as_array().unwrap();
            assert_eq!(texts.len(), 2);
            let vectors: Vec<Vec<f64>> = texts.iter().map(|_| vec![0.1, 0.2, 0.3]).collect();
            (200, serde_json::json!({ "vectors": vectors }).to_string())
        }),
    );
    let encoder = HttpEncoder::new(format!("{}/embed", server.url), 3);
    let out = encoder
        .embed_batch(&["alpha".to_string(), "beta".to_string()])
        .unwrap();
    assert_eq!(out, vec![vec![0.1, 0.2, 0.3], vec![0.1, 0.2, 0.3]]);
    server.join();
}

#[test]
fn http_encoder_dimension_mismatch() {
    let server = TestServer::start(
        1,
        Box::new(|_, _| {
            let vector: Vec<f64> = (0..383).map(|i| i as f64).collect();
            (200, serde_json::json!({ "vectors": [vector] }).to_string())
        }),
    );
    let encoder = HttpEncoder::new(server.url.clone(), 384);
    let err = encoder.embed("text").unwrap_err();
    match err {
        EncoderError::DimensionMismatch { expected, got, .. } => {
            assert_eq!(expected, 384);
            assert_eq!(got, 383);
        }
        other => panic!("unexpected error {other:?}"),
    }
    server.join();
}

#[test]
fn http_encoder_unreachable_is_backend_unavailable() {
    let encoder = HttpEncoder::new("http://127.0.0.1:1/embed".to_string(), 4);
    assert!(matches!(
        encoder.embed("x"),
        Err(EncoderError::BackendUnavailable { .. })
    ));
}

#[test]
fn external_detector_train_eval() {
    let server = TestServer::start(
        1,
        Box::new(|path, body| {
            assert_eq!(path, "/train_eval");
            let parsed: serde_json::Value = serde_json::from_str(body).unwrap();
            let items = parsed["items"].as_array().unwrap();
            assert_eq!(items.len(), 4);
            assert_eq!(items[0]["label"].as_str().unwrap(), "ai");
            assert!((parsed["val_fraction"].as_f64().unwrap() - 0.2).abs() < 1e-12);
            assert_eq!(parsed["seed"].as_u64().unwrap(), 17);
            (200, r#"{"accuracy": 0.91}"#.to_string())
        }),
    );
    let set = BalancedSet {
        items: vec![
            ("machine one".to_string(), Label::Ai),
            ("machine two".to_string(), Label::Ai),
            ("person one".to_string(), Label::Human),
            ("person two".to_string(), Label::Human),
        ],
        seed: 17,
    };
    let detector = ExternalDetector::new(format!("{}/train_eval", server.url));
    let accuracy = detector.train_eval(&set, 0.2, 17).unwrap();
    assert!((accuracy - 0.91).abs() < 1e-12);
    server.join();
}

#[test]
fn external_detector_rejects_out_of_range_accuracy() {
    let server = TestServer::start(1, Box::new(|_, _| (200, r#"{"accuracy": 1.7}"#.to_string())));
    let detector = ExternalDetector::new(server.url.clone());
    let set = BalancedSet {
        items: vec![
            ("a".to_string(), Label::Ai),
            ("b".to_string(), Label::Human),
        ],
        seed: 1,
    };
    assert!(detector.train_eval(&set, 0.2, 1).is_err());
    server.join();
}

#[test]
fn http_toxicity_scores_one_text() {
    let server = TestServer::start(
        1,
        Box::new(|_, body| {
            let parsed: serde_json::Value = serde_json::from_str(body).unwrap();
            assert_eq!(parsed["texts"].as_array().unwrap().len(), 1);
            (200, r#"{"scores": [0.73]}"#.to_string())
        }),
    );
    let scorer = HttpToxicity::new(server.url.clone());
    assert!((scorer.score("whatever").unwrap() - 0.73).abs() < 1e-12);
    server.join();
}

#[test]
fn chat_endpoint_speaks_chat_completions() {
    let server = TestServer::start(
        1,
        Box::new(|path, body| {
            assert_eq!(path, "/v1/chat/completions");
            let parsed: serde_json::Value = serde_json::from_str(body).unwrap();
            assert_eq!(parsed["model"].as_str().unwrap(), "demo");
            assert!((parsed["temperature"].as_f64().unwrap() - 0.8).abs() < 1e-12);
            assert_eq!(parsed["n"].as_u64().unwrap(), 2);
            assert_eq!(parsed["messages"][0]["role"].as_str().unwrap(), "user");
            (
                200,
                serde_json::json!({
                    "choices": [
                        {"message": {"content": "first"}, "finish_reason": "stop"},
                        {"message": {"content": "second"}, "finish_reason": "stop"},
                    ]
                })
                .to_string(),
            )
        }),
    );
    let config = EndpointConfig {
        base_url: format!("{}/v1", server.url),
        model: "demo".to_string(),
        temperature: 0.8,
        max_tokens: None,
        auth_env: None,
        timeout_s: 5,
        max_retries: 0,
        concurrency: 2,
    };
    let client = config.client().unwrap();
    let out = client
        .complete(&ChatRequest {
            messages: vec![ChatMessage::user("hi")],
            n: 2,
        })
        .unwrap();
    assert_eq!(out, vec!["first", "second"]);
    server.join();
}

#[test]
fn chat_endpoint_requires_auth_env_when_configured() {
    let config = EndpointConfig {
        base_url: "http://127.0.0.1:9/v1".to_string(),
        model: "demo".to_string(),
        temperature: 0.8,
        max_tokens: None,
        auth_env: Some("CTT_TEST_TOKEN_THAT_DOES_NOT_EXIST".to_string()),
        timeout_s: 5,
        max_retries: 0,
        concurrency: 1,
    };
    let err = config.client().err().expect("missing env var");
    assert!(err.to_string().contains("CTT_TEST_TOKEN_THAT_DOES_NOT_EXIST"));
}
