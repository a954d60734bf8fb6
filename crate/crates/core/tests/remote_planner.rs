mod common;

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use scenesearch::actionlang::{Action, ParseFailure};
use scenesearch::harness::{run_episode, EpisodeConfig, EpisodeMeta, EpisodeRecord};
use scenesearch::planner::RemotePlanner;
use scenesearch::scenegraph::Site;
use scenesearch::world::{scene_task, GenProfile};

#[derive(Clone, Copy)]
enum Mode {
    Answer,
    /// Answer once, then drop the connection.
    HangUpAfterEach,
    /// Read requests but never answer.
    Silent,
}

/// Planner stub answering with scripted texts, in order, across connections.
fn stub(script: &[&str], mode: Mode) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let queue: Arc<Mutex<VecDeque<String>>> =
        Arc::new(Mutex::new(script.iter().map(|s| s.to_string()).collect()));
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { return };
            let queue = queue.clone();
            std::thread::spawn(move || {
                let mut writer = stream.try_clone().unwrap();
                for line in BufReader::new(stream).lines() {
                    let Ok(_) = line else { return };
                    if let Mode::Silent = mode {
                        continue;
                    }
                    let text = queue.lock().unwrap().pop_front().unwrap_or_default();
                    let frame = serde_json::json!({"v": 1, "type": "response", "text": text});
                    if writeln!(writer, "{frame}").is_err() {
                        return;
                    }
                    if let Mode::HangUpAfterEach = mode {
                        return;
                    }
                }
            });
        }
    });
    addr
}

fn episode(planner: &mut RemotePlanner, max_steps: u32) -> EpisodeRecord {
    let (house, task) = scene_task(1001, 0, &GenProfile::default()).unwrap();
    let cfg = EpisodeConfig {
        max_steps,
        ..Default::default()
    };
    run_episode(planner, Site::new(house).unwrap(), &task, &cfg, &EpisodeMeta::default()).unwrap()
}

#[test]
fn done_reply_becomes_done_action() {
    let addr = stub(&["Command:\ndone()"], Mode::Answer);
    let r = episode(&mut RemotePlanner::new(addr), 5);
    assert_eq!(r.steps.len(), 1);
    assert_eq!(r.steps[0].outcome.action, Some(Action::Done));
    assert!(!r.success, "goal is not visible at the start");
    assert_eq!(r.steps[0].reward.total, 0.3);
}

#[test]
fn malformed_reply_costs_point_four() {
    let addr = stub(&["no idea", "", "navigate(kitchen"], Mode::Answer);
    let r = episode(&mut RemotePlanner::new(addr), 3);
    assert_eq!(r.steps.len(), 3);
    assert_eq!(r.retrials, 3);
    for s in &r.steps {
        assert!(s.outcome.parse_failure.is_some());
        assert!((s.reward.total + 0.4).abs() < 1e-12);
    }
}

const SCRIPT: [&str; 3] = [
    "I refuse to use the format.",
    "Analysis: the bed is usually in a bedroom.\nReasoning: explore it.\nCommand: explore(bedroom)",
    "Analysis: bed_1 is listed.\nReasoning: finished.\nCommand: done()",
];

#[test]
fn recorded_session_matches_golden() {
    let addr = stub(&SCRIPT, Mode::Answer);
    let mut planner = RemotePlanner::new(addr).recording();
    let r = episode(&mut planner, 10);
    assert!(r.success);
    assert_eq!(r.steps.len(), 3);
    // The transcript is address-independent: requests carry only prompts.
    let text: String = planner.transcript().iter().map(|l| format!("{l}\n")).collect();
    common::assert_golden("remote_session.txt", &text);
}

#[test]
fn golden_replies_replay_to_identical_requests() {
    let golden = common::read_golden("remote_session.txt");
    let replies: Vec<String> = golden
        .lines()
        .filter_map(|l| l.strip_prefix("< "))
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["text"].as_str().unwrap().to_string())
        .collect();
    let refs: Vec<&str> = replies.iter().map(String::as_str).collect();
    let addr = stub(&refs, Mode::Answer);
    let mut planner = RemotePlanner::new(addr).recording();
    episode(&mut planner, 10);
    let requests: Vec<&str> = golden.lines().filter(|l| l.starts_with("> ")).collect();
    let sent: Vec<&str> = planner
        .transcript()
        .iter()
        .map(String::as_str)
        .filter(|l| l.starts_with("> "))
        .collect();
    assert_eq!(sent, requests);
}

#[test]
fn reconnects_when_the_server_hangs_up() {
    let addr = stub(&SCRIPT, Mode::HangUpAfterEach);
    let r = episode(&mut RemotePlanner::new(addr), 10);
    assert!(r.success);
    assert!(r.fault.is_none());
}

#[test]
fn silence_is_a_timeout_step() {
    let addr = stub(&[], Mode::Silent);
    let mut planner = RemotePlanner::new(addr).with_timeout(Duration::from_millis(150));
    let r = episode(&mut planner, 2);
    assert_eq!(r.steps.len(), 2);
    assert!(r.fault.is_none());
    for s in &r.steps {
        assert_eq!(s.outcome.parse_failure, Some(ParseFailure::Timeout));
        assert!((s.reward.total + 0.4).abs() < 1e-12);
    }
}

#[test]
fn unreachable_server_aborts_with_fault() {
    let addr = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().to_string()
    };
    let mut planner = RemotePlanner::new(addr).with_timeout(Duration::from_millis(500));
    let r = episode(&mut planner, 5);
    assert!(r.fault.is_some());
    assert!(!r.success);
    assert!(r.steps.is_empty());
}
