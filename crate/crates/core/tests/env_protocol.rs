mod common;

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};

use scenesearch::actionlang::serialize_observation;
use scenesearch::envserver::{serve_listener, serve_stream, Connection};
use scenesearch::harness::{run_episode, EpisodeConfig, EpisodeMeta};
use scenesearch::planner::{OraclePlanner, PlanContext, Planner, PlannerError};
use scenesearch::reward::{RewardBreakdown, RewardParams};
use scenesearch::scenegraph::Site;
use scenesearch::world::{scene_task, GenProfile};
use serde_json::Value;

/// Builds the scripted session: a garbage response, two inexecutable
/// commands, then oracle commands until `done()`, followed by a second
/// session under the strong distance penalty that ends immediately.
fn scripted_session() -> Vec<(String, String)> {
    let mut conn = Connection::new();
    let mut lines = Vec::new();
    let mut send = |conn: &mut Connection, req: String| {
        let resp = conn.handle_line(&req);
        lines.push((req, resp.clone()));
        serde_json::from_str::<Value>(&resp).unwrap()
    };
    send(&mut conn, r#"{"v":1,"type":"reset","seed":1001}"#.into());
    let step = |text: &str| {
        serde_json::json!({"v": 1, "type": "step", "session": "s1", "response_text": text}).to_string()
    };
    send(&mut conn, step("I would rather not say."));
    send(&mut conn, step("Analysis: -\nReasoning: -\nCommand: navigate(attic, chest_9)"));
    send(&mut conn, step("Command:\n`close()`"));
    loop {
        let session = conn.session("s1").unwrap();
        let prompt = serialize_observation(&session.snapshot, &session.task);
        let ctx = PlanContext {
            snapshot: &session.snapshot,
            task: &session.task,
            prompt: &prompt,
        };
        let text = OraclePlanner.respond(&ctx).unwrap();
        let resp = send(&mut conn, step(&text));
        if resp["done"] == true {
            break;
        }
    }
    send(
        &mut conn,
        r#"{"v":1,"type":"reset","seed":1001,"reward_params":{"lambda_efficiency":0.6}}"#.into(),
    );
    send(
        &mut conn,
        serde_json::json!({"v": 1, "type": "step", "session": "s2", "response_text": "Command:\ndone()"})
            .to_string(),
    );
    send(&mut conn, step("Command:\ndone()"));
    lines
}

fn transcript_text(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(q, a)| format!("> {q}\n< {a}\n")).collect()
}

fn golden_pairs() -> Vec<(String, String)> {
    let text = common::read_golden("env_session.txt");
    let lines: Vec<&str> = text.lines().collect();
    lines
        .chunks(2)
        .map(|c| {
            (
                c[0].strip_prefix("> ").unwrap().to_string(),
                c[1].strip_prefix("< ").unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn scripted_session_matches_golden() {
    let pairs = scripted_session();
    assert_eq!(pairs.len(), 9, "reset + 5 steps + reset + 2 steps");
    common::assert_golden("env_session.txt", &transcript_text(&pairs));
}

#[test]
fn golden_replays_in_process() {
    let mut conn = Connection::new();
    for (req, resp) in golden_pairs() {
        assert_eq!(conn.handle_line(&req), resp);
    }
}

#[test]
fn golden_replays_over_stdio_framing() {
    let pairs = golden_pairs();
    let input: String = pairs.iter().map(|(q, _)| format!("{q}\n")).collect();
    let mut output = Vec::new();
    serve_stream(input.as_bytes(), &mut output).unwrap();
    let expected: String = pairs.iter().map(|(_, a)| format!("{a}\n")).collect();
    assert_eq!(String::from_utf8(output).unwrap(), expected);
}

#[test]
fn golden_replays_over_tcp() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || serve_listener(listener));
    let stream = TcpStream::connect(addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    for (req, resp) in golden_pairs() {
        writer.write_all(format!("{req}\n").as_bytes()).unwrap();
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        assert_eq!(line.trim_end(), resp);
    }
    // A second connection starts its own session numbering.
    let mut other = TcpStream::connect(addr).unwrap();
    other
        .write_all(b"{\"v\":1,\"type\":\"reset\",\"seed\":3}\n")
        .unwrap();
    let mut line = String::new();
    BufReader::new(other).read_line(&mut line).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&line).unwrap()["session"], "s1");
}

#[test]
fn strong_penalty_is_echoed() {
    let pairs = golden_pairs();
    let reset: Value = serde_json::from_str(&pairs[6].1).unwrap();
    assert_eq!(reset["params"]["reward_params"]["lambda_efficiency"], 0.6);
    assert_eq!(reset["params"]["reward_params"]["r_success"], 5.0);
}

#[test]
fn done_at_start_fails_with_only_the_executable_term() {
    let pairs = golden_pairs();
    let step: Value = serde_json::from_str(&pairs[7].1).unwrap();
    assert_eq!(step["done"], true);
    assert_eq!(step["success"], false);
    let r: RewardBreakdown = serde_json::from_value(step["reward"].clone()).unwrap();
    assert_eq!(r.executable_term, Some(0.3));
    assert_eq!(r.explore_term, Some(0.0));
    assert_eq!(r.efficiency_term.map(f64::abs), Some(0.0));
    assert_eq!(r.format_term, Some(0.0));
    assert_eq!(r.total, 0.3);
    let after: Value = serde_json::from_str(&pairs[8].1).unwrap();
    assert_eq!(after["code"], "session_finished");
}

struct Scripted(Vec<String>, usize);

impl Planner for Scripted {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn respond(&mut self, _: &PlanContext<'_>) -> Result<String, PlannerError> {
        self.1 += 1;
        Ok(self.0[self.1 - 1].clone())
    }
}

#[test]
fn wire_rewards_equal_in_process_rewards() {
    for (session, lambda) in [("s1", 0.3), ("s2", 0.6)] {
        let pairs: Vec<(Value, Value)> = golden_pairs()
            .into_iter()
            .map(|(q, a)| (serde_json::from_str::<Value>(&q).unwrap(), serde_json::from_str::<Value>(&a).unwrap()))
            .filter(|(q, a)| q["type"] == "step" && q["session"] == session && a["type"] == "step")
            .collect();
        let texts = pairs
            .iter()
            .map(|(q, _)| q["response_text"].as_str().unwrap().to_string())
            .collect();
        let (house, task) = scene_task(1001, 0, &GenProfile::default()).unwrap();
        let cfg = EpisodeConfig {
            max_steps: 30,
            reward: RewardParams {
                lambda_efficiency: lambda,
                ..Default::default()
            },
        };
        let record = run_episode(
            &mut Scripted(texts, 0),
            Site::new(house).unwrap(),
            &task,
            &cfg,
            &EpisodeMeta::default(),
        )
        .unwrap();
        assert_eq!(record.steps.len(), pairs.len());
        for (step, (_, wire)) in record.steps.iter().zip(&pairs) {
            let wire_reward: RewardBreakdown = serde_json::from_value(wire["reward"].clone()).unwrap();
            assert_eq!(step.reward, wire_reward);
            assert_eq!(wire["success"], step.reward.success);
        }
    }
}

#[test]
fn success_over_the_wire_pays_exactly_five() {
    let pairs = golden_pairs();
    let last: Value = serde_json::from_str(&pairs[5].1).unwrap();
    assert_eq!(last["done"], true);
    assert_eq!(last["success"], true);
    assert_eq!(last["reward"]["total"].as_f64(), Some(5.0));
}

#[test]
fn garbage_costs_point_four_over_the_wire() {
    let pairs = golden_pairs();
    let first: Value = serde_json::from_str(&pairs[1].1).unwrap();
    assert_eq!(first["reward"]["total"].as_f64(), Some(-0.4));
    assert_eq!(first["outcome"]["parse_failure"], "bad-command");
}
