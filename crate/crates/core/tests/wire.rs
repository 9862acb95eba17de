use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use objnav_core::config::Params;
use objnav_core::episode::{run_episode, EpisodeConfig};
use objnav_core::prediction::{HeuristicPredictor, PriorTable, TargetPredictor};
use objnav_core::scenegen::{generate_scene, Density, LayoutSpec};
use objnav_core::wire::{decode_line, encode_line, PredictRequest, RemotePredictor, RemoteScorer};
use objnav_core::world::{OracleScorer, SemanticScorer};
use objnav_core::{CellCoord, ClassId, GridLayer};

/// Serves every connection on a background thread. Prediction requests get
/// the highest-confidence cell back; score requests get 0.25.
fn stub_server(reply: fn(&Value) -> String) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            std::thread::spawn(move || {
                let mut writer = stream.try_clone().unwrap();
                for line in BufReader::new(stream).lines() {
                    let Ok(line) = line else { break };
                    let req: Value = serde_json::from_str(&line).unwrap_or(Value::Null);
                    if writer.write_all(reply(&req).as_bytes()).is_err() {
                        break;
                    }
                }
            });
        }
    });
    format!("tcp://{addr}")
}

fn echo(req: &Value) -> String {
    if req["op"] == "score" {
        return json!({"v": 1, "score": 0.25}).to_string() + "\n";
    }
    let w = req["w"].as_u64().unwrap() as usize;
    let cmap: Vec<u64> = req["cmap"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect();
    let best = (0..cmap.len()).max_by_key(|&i| (cmap[i], std::cmp::Reverse(i))).unwrap();
    json!({"v": 1, "points": [[best % w, best / w]]}).to_string() + "\n"
}

fn maps() -> (GridLayer<ClassId>, GridLayer<f64>) {
    let mut smap = GridLayer::new(10, 8, 0.25, ClassId::EMPTY);
    let mut cmap = GridLayer::new(10, 8, 0.25, 0.0);
    for (c, k, conf) in [((2, 3), 1, 0.6), ((7, 5), 2, 0.9)] {
        smap.set(CellCoord::new(c.0, c.1), ClassId(k));
        cmap.set(CellCoord::new(c.0, c.1), conf);
    }
    (smap, cmap)
}

fn heuristic() -> HeuristicPredictor {
    let names = vec!["bed".to_string(), "nightstand".to_string()];
    HeuristicPredictor { prior: PriorTable::builtin().resolve(&names), max_targets: 3 }
}

#[test]
fn remote_prediction_over_tcp() {
    let endpoint = stub_server(echo);
    let mut p = RemotePredictor::connect(&endpoint, Duration::from_secs(2), heuristic());
    let (smap, cmap) = maps();
    for _ in 0..3 {
        let out = p.predict(&smap, &cmap, ClassId(1)).unwrap();
        assert_eq!(out.fallback, None);
        assert_eq!(out.targets.points, vec![CellCoord::new(7, 5)]);
    }
}

#[test]
fn unreachable_endpoint_falls_back_to_the_heuristic() {
    // Bind then drop to get a port nobody listens on.
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut p = RemotePredictor::connect(&format!("127.0.0.1:{port}"), Duration::from_millis(200), heuristic());
    let (smap, cmap) = maps();
    let out = p.predict(&smap, &cmap, ClassId(1)).unwrap();
    assert!(out.fallback.is_some());
    assert_eq!(out.targets, heuristic().predict(&smap, &cmap, ClassId(1)).unwrap().targets);

    let mut p = RemotePredictor::connect("exec:/nonexistent/predictor", Duration::from_millis(200), heuristic());
    assert!(p.predict(&smap, &cmap, ClassId(1)).unwrap().fallback.is_some());
}

#[test]
fn bad_responses_fall_back() {
    for reply in [
        (|_: &Value| "not json\n".to_string()) as fn(&Value) -> String,
        |_| "{\"v\":2,\"points\":[[1,1]]}\n".into(),
        |_| "{\"v\":1,\"points\":[]}\n".into(),
        |_| "{\"v\":1,\"error\":\"model not loaded\"}\n".into(),
    ] {
        let mut p = RemotePredictor::connect(&stub_server(reply), Duration::from_secs(2), heuristic());
        let (smap, cmap) = maps();
        assert!(p.predict(&smap, &cmap, ClassId(1)).unwrap().fallback.is_some());
    }
}

#[test]
fn request_round_trip_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let (w, h) = (rng.random_range(1..40), rng.random_range(1..40));
        let smap =
            GridLayer::from_vec(w, h, 0.25, (0..w * h).map(|_| ClassId(rng.random_range(0..12))).collect()).unwrap();
        // Thousandths survive the integer encoding exactly.
        let cmap = GridLayer::from_vec(
            w,
            h,
            0.25,
            (0..w * h).map(|_| f64::from(rng.random_range(0..=1000u16)) / 1000.0).collect(),
        )
        .unwrap();
        let target = ClassId(rng.random_range(1..12));
        let req = PredictRequest::from_maps(&smap, &cmap, target).unwrap();
        let line = encode_line(&req);
        assert!(line.ends_with('\n') && !line[..line.len() - 1].contains('\n'));
        let back: PredictRequest = decode_line(&line).unwrap();
        assert_eq!(back, req);
        assert_eq!(back.to_maps(0.25).unwrap(), (smap, cmap, target));
    }
}

#[test]
fn malformed_requests_are_rejected() {
    assert!(decode_line::<PredictRequest>("{\"v\":1,\"w\":1}").is_err());
    assert!(decode_line::<PredictRequest>(
        "{\"v\":1,\"w\":1,\"h\":1,\"target_class\":1,\"smap\":[0],\"cmap\":[0],\"x\":1}"
    )
    .is_err());
    let bad: PredictRequest =
        decode_line("{\"v\":1,\"w\":2,\"h\":1,\"target_class\":1,\"smap\":[0],\"cmap\":[0,0]}").unwrap();
    assert!(bad.to_maps(0.25).is_err());
}

#[test]
fn remote_scorer_uses_service_then_oracle() {
    let scene = generate_scene("s", &LayoutSpec::default(), Density::Sparse, 1).unwrap();
    let pose = scene.start();
    let visible = [pose.cell(scene.resolution())];
    let mut remote = RemoteScorer::connect(&stub_server(echo), Duration::from_secs(2), OracleScorer::default());
    assert_eq!(remote.score(&scene, &pose, &visible, scene.target_class(), 3), 0.25);
    assert_eq!(remote.failures, 0);

    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut down =
        RemoteScorer::connect(&format!("127.0.0.1:{port}"), Duration::from_millis(200), OracleScorer::default());
    let got = down.score(&scene, &pose, &visible, scene.target_class(), 3);
    let want = OracleScorer::default().score(&scene, &pose, &visible, scene.target_class(), 3);
    assert_eq!(got, want);
    assert_eq!(down.failures, 1);
}

#[test]
fn episode_runs_against_a_remote_predictor() {
    let scene = generate_scene("s", &LayoutSpec::default(), Density::Dense, 2).unwrap();
    let mut params = Params::default();
    params.episode.max_steps = 80;
    params.remote.predictor = Some(stub_server(echo));
    let run = run_episode(&scene, &EpisodeConfig::new(params).unwrap()).unwrap();
    assert!(run.result.predictor_calls > 0);
    assert_eq!(run.result.fallbacks, 0);
}
