use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use frmp_api::{router, AppState, Config};
use frmp_core::fixtures::koupa_mini;
use frmp_core::{GeoPoint, ManualClock, Mutation, RoadSegment, SegmentId, Store};

const CCO: &str = "token-cco";
const AM: &str = "token-am";

fn config(public_read: bool) -> Config {
    Config::from_toml_str(&format!(
        r#"
        public_read = {public_read}
        [[users]]
        id = "cco1"
        display_name = "Call centre"
        role = "CCO"
        token = "{CCO}"
        [[users]]
        id = "am1"
        display_name = "Manager"
        role = "AM"
        token = "{AM}"
        "#
    ))
    .unwrap()
}

fn seed(path: &Path, extra: Vec<RoadSegment>) {
    let store = Store::open(path).unwrap();
    let mut batch: Vec<Mutation> = koupa_mini().segments().values().cloned().map(Mutation::PutSegment).collect();
    batch.extend(extra.into_iter().map(Mutation::PutSegment));
    store.commit(batch).unwrap();
}

fn app_at(path: &Path, public_read: bool) -> Router {
    let state = AppState::with_clock(
        &config(public_read),
        Store::open(path).unwrap(),
        Arc::new(ManualClock::fixture()),
    )
    .unwrap();
    router(state)
}

struct Fixture {
    _dir: tempfile::TempDir,
    path: std::path::PathBuf,
    app: Router,
}

fn fixture(public_read: bool) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frmp.store");
    seed(&path, Vec::new());
    let app = app_at(&path, public_read);
    Fixture { _dir: dir, path, app }
}

async fn call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn file_sample_reports(app: &Router) {
    let (s, _) = call(
        app,
        "POST",
        "/reports",
        Some(CCO),
        Some(json!({"report_code": "Landslide", "report_comments": "rocks", "ogr_fid": 378})),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
    let (s, _) = call(
        app,
        "POST",
        "/reports",
        Some(CCO),
        Some(json!({"report_code": "Closed Road", "report_comments": "flooded", "ogr_fid": 189})),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
}

fn statuses(map: &Value) -> Vec<(u64, String)> {
    map["features"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["properties"]["status"] != "open")
        .map(|f| (f["id"].as_u64().unwrap(), f["properties"]["status"].as_str().unwrap().to_owned()))
        .collect()
}

#[tokio::test]
async fn segment_details() {
    let f = fixture(false);
    let (s, seg) = call(&f.app, "GET", "/segments/189", Some(CCO), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(seg["road_width"], 6.0);
    assert_eq!(seg["type_of_technical_work"], "Culvert");
    assert_eq!(seg["status"], "open");
    assert!((seg["length_m"].as_f64().unwrap() - 1800.0).abs() < 1e-6);

    let (s, err) = call(&f.app, "GET", "/segments/0", Some(CCO), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(err["error"]["code"], "not_found");

    let (s, page) = call(&f.app, "GET", "/segments?limit=5&offset=2", Some(CCO), None).await;
    assert_eq!(s, StatusCode::OK);
    let ids: Vec<u64> = page.as_array().unwrap().iter().map(|v| v["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [103, 189, 201, 202, 301]);
}

#[tokio::test]
async fn empty_store() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_at(&dir.path().join("s"), false);
    let (s, v) = call(&app, "GET", "/segments", Some(AM), None).await;
    assert_eq!((s, v), (StatusCode::OK, json!([])));
    let (_, map) = call(&app, "GET", "/map.geojson", Some(AM), None).await;
    assert_eq!(map, json!({"type": "FeatureCollection", "features": []}));
}

#[tokio::test]
async fn segment_edit_survives_restart() {
    let f = fixture(false);
    let (s, seg) = call(&f.app, "PUT", "/segments/189", Some(CCO), Some(json!({"road_width": 5.25}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(seg["road_width"], 5.25);
    drop(f.app);
    let app = app_at(&f.path, false);
    let (_, seg) = call(&app, "GET", "/segments/189", Some(AM), None).await;
    assert_eq!(seg["road_width"], 5.25);
}

#[tokio::test]
async fn segment_edit_validation() {
    let f = fixture(false);
    let (_, h0) = call(&f.app, "GET", "/health", None, None).await;
    let (s, same) = call(&f.app, "PUT", "/segments/189", Some(CCO), Some(json!({}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(same["road_width"], 6.0);
    let (_, h1) = call(&f.app, "GET", "/health", None, None).await;
    assert_eq!(h0["revision"], h1["revision"]);

    let (s, err) = call(&f.app, "PUT", "/segments/189", Some(CCO), Some(json!({"road_width": -1.0}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"]["code"], "validation_error");
    let (s, _) = call(&f.app, "PUT", "/segments/189", Some(CCO), Some(json!({"colour": "red"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&f.app, "PUT", "/segments/4242", Some(CCO), Some(json!({"road_width": 4.0}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn report_lifecycle_over_http() {
    let f = fixture(false);
    let body = json!({
        "report_code": "Closed Road",
        "report_comments": "Flooded after heavy rain",
        "ogr_fid": 189,
        "creation_date": "2018-03-27",
        "last_update_date": "2018-03-25",
        "report_status": "Active"
    });
    let (s, r) = call(&f.app, "POST", "/reports", Some(CCO), Some(body)).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(r["report_code"], "ClosedRoad");
    assert_eq!(r["ogr_fid"], 189);
    assert_eq!(r["report_status"], "Active");
    assert_eq!(r["reporter"], "cco1");
    assert_eq!(r["creation_date"], "2018-03-27T00:00:00Z");
    assert_eq!(r["creation_date"], r["last_update_date"]);

    let (s, _) = call(&f.app, "POST", "/reports/resolve", Some(CCO), Some(json!({"ids": [1]}))).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    let (s, v) = call(&f.app, "POST", "/reports/resolve", Some(AM), Some(json!({"ids": [1]}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["resolved"], 1);
    let (s, v) = call(&f.app, "POST", "/reports/resolve", Some(AM), Some(json!({"ids": [1]}))).await;
    assert_eq!((s, v["resolved"].clone()), (StatusCode::OK, json!(0)));

    let (s, err) = call(&f.app, "PATCH", "/reports/1", Some(CCO), Some(json!({"report_comments": "x"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(err["error"]["code"], "invalid_state");

    let (s, _) = call(&f.app, "POST", "/reports", Some(CCO), Some(json!({"report_code": "Meteor", "ogr_fid": 189}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&f.app, "POST", "/reports", Some(CCO), Some(json!({"report_code": "Erosion", "ogr_fid": 4242}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, err) = call(&f.app, "POST", "/reports", Some(CCO), Some(json!("not an object"))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"]["code"], "validation_error");
}

#[tokio::test]
async fn report_listing_and_filters() {
    let f = fixture(false);
    file_sample_reports(&f.app).await;
    let (_, all) = call(&f.app, "GET", "/reports?status=Active", Some(AM), None).await;
    let rows: Vec<(String, u64)> = all
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["report_code"].as_str().unwrap().to_owned(), r["ogr_fid"].as_u64().unwrap()))
        .collect();
    assert_eq!(rows, [("ClosedRoad".to_owned(), 189), ("Landslide".to_owned(), 378)]);
    let (_, none) = call(&f.app, "GET", "/reports?code=Erosion", Some(AM), None).await;
    assert_eq!(none, json!([]));
    let (_, one) = call(&f.app, "GET", "/reports?ogr_fid=378", Some(AM), None).await;
    assert_eq!(one.as_array().unwrap().len(), 1);
    let (s, _) = call(&f.app, "GET", "/reports?status=Bogus", Some(AM), None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn assignments_and_deletes() {
    let f = fixture(false);
    file_sample_reports(&f.app).await;
    let (s, est) = call(&f.app, "POST", "/assignments/estimate", Some(AM), Some(json!({"report_ids": [1, 2]}))).await;
    assert_eq!(s, StatusCode::OK);
    // Landslide on 378 (J, 4.1735 km from A) and closure on 189 (also J).
    let expect = 2000.0 + 12.0 * 4.1735 + 800.0 + 10.0 * 4.1735;
    assert!((est["total_cost"].as_f64().unwrap() - expect).abs() < 1e-6, "{est}");

    let (s, out) = call(&f.app, "POST", "/assignments", Some(AM), Some(json!({"report_ids": [2], "assignee": "crew-north"}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(out["reports"][0]["report_status"], "Assigned");
    assert_eq!(out["assignment"]["assignee"], "crew-north");

    let (s, _) = call(&f.app, "POST", "/assignments", Some(AM), Some(json!({"report_ids": [1, 2]}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (_, r1) = call(&f.app, "GET", "/reports/1", Some(AM), None).await;
    assert_eq!(r1["report_status"], "Active");

    let (s, _) = call(&f.app, "DELETE", "/reports/2", Some(AM), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = call(&f.app, "DELETE", "/reports/1", Some(AM), None).await;
    assert_eq!(s, StatusCode::NO_CONTENT);
    let (s, _) = call(&f.app, "GET", "/reports/1", Some(AM), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn route_payload_reproduces_scenarios() {
    let f = fixture(false);
    file_sample_reports(&f.app).await;
    let (s, v) = call(&f.app, "POST", "/route", Some(CCO), Some(json!({"origin": 1, "dest": 5}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["blocked"], json!([189, 378]));
    assert!((v["baseline"]["distance_m"].as_f64().unwrap() - 7769.0).abs() < 1e-6);
    assert_eq!(v["baseline"]["time_display"], "33.29");
    assert!((v["naive"]["total_distance_m"].as_f64().unwrap() - 13603.0).abs() < 1e-6);
    assert_eq!(v["naive"]["time_display"], "58.29");
    let alt_times: Vec<&str> = v["alternatives"].as_array().unwrap().iter().map(|a| a["time_display"].as_str().unwrap()).collect();
    assert_eq!(alt_times, ["35.38", "41.89"]);
    let d: Vec<&str> = v["pct_change_d"].as_array().unwrap().iter().map(|x| x["display"].as_str().unwrap()).collect();
    assert_eq!(d, ["75.09", "6.27", "25.82"]);
    let gain: Vec<&str> = v["time_improvement_vs_naive"].as_array().unwrap().iter().map(|x| x["display"].as_str().unwrap()).collect();
    assert_eq!(gain, ["68.82", "49.27"]);

    let (_, same) = call(&f.app, "POST", "/route", Some(CCO), Some(json!({"origin": 3, "dest": 3}))).await;
    assert_eq!(same["baseline"]["distance_m"], 0.0);
    assert!(same["pct_change_d"].as_array().unwrap().iter().all(|x| x["value"] == 0.0));

    let (s, _) = call(&f.app, "POST", "/route", Some(CCO), Some(json!({"origin": 1, "dest": 999}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&f.app, "POST", "/route", Some(CCO), Some(json!({"origin": 1, "dest": 5, "k": 0}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&f.app, "POST", "/route", Some(CCO), Some(json!({"origin": 1, "dest": 5, "profile": "jet"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn disconnected_destination_is_unprocessable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s");
    let far = vec![GeoPoint::new(23.5, 41.5).unwrap(), GeoPoint::new(23.51, 41.5).unwrap()];
    seed(&path, vec![RoadSegment::new(SegmentId(900), far).unwrap()]);
    let app = app_at(&path, false);
    let (_, junctions) = call(&app, "GET", "/junctions", Some(AM), None).await;
    let island = junctions
        .as_array()
        .unwrap()
        .iter()
        .find(|j| j["incident"][0][0] == 900)
        .unwrap()["id"]
        .as_u64()
        .unwrap();
    let (s, err) = call(&app, "POST", "/route", Some(AM), Some(json!({"origin": 1, "dest": island}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["error"]["code"], "unreachable");
}

#[tokio::test]
async fn map_follows_report_status() {
    let f = fixture(false);
    let (_, map) = call(&f.app, "GET", "/map.geojson", Some(CCO), None).await;
    assert!(statuses(&map).is_empty());
    assert_eq!(map["features"].as_array().unwrap().len(), 18);

    let (_, r) = call(&f.app, "POST", "/reports", Some(CCO), Some(json!({"report_code": "ClosedRoad", "ogr_fid": 189}))).await;
    let (_, map) = call(&f.app, "GET", "/map.geojson", Some(CCO), None).await;
    assert_eq!(statuses(&map), [(189, "blocked".to_owned())]);
    let f189 = map["features"].as_array().unwrap().iter().find(|f| f["id"] == 189).unwrap();
    assert_eq!(f189["properties"]["active_report_count"], 1);
    assert_eq!(f189["properties"]["road_type"], "Forest Road Category 'C'");

    call(&f.app, "POST", "/reports/resolve", Some(AM), Some(json!({"ids": [r["id"]]}))).await;
    let (_, map) = call(&f.app, "GET", "/map.geojson", Some(CCO), None).await;
    assert!(statuses(&map).is_empty());

    // A non-blocking problem is counted but leaves the road open.
    call(&f.app, "POST", "/reports", Some(CCO), Some(json!({"report_code": "Erosion", "ogr_fid": 101}))).await;
    let (_, map) = call(&f.app, "GET", "/map.geojson", Some(CCO), None).await;
    assert!(statuses(&map).is_empty());
    let f101 = map["features"].as_array().unwrap().iter().find(|f| f["id"] == 101).unwrap();
    assert_eq!(f101["properties"]["active_report_count"], 1);
}

#[tokio::test]
async fn bad_token_is_unauthorized() {
    let f = fixture(true);
    let (s, err) = call(&f.app, "GET", "/segments", Some("nope"), None).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    assert_eq!(err["error"]["code"], "unauthorized");
}

/// Every endpoint for every role. Each request runs against a fresh store
/// holding the two sample reports.
#[tokio::test]
async fn role_matrix() {
    #[derive(Clone, Copy, PartialEq, Debug)]
    enum Need {
        Read,
        Edit,
        Manage,
    }
    let endpoints: Vec<(&str, &str, Option<Value>, Need)> = vec![
        ("GET", "/segments", None, Need::Read),
        ("GET", "/segments/189", None, Need::Read),
        ("PUT", "/segments/189", Some(json!({"road_width": 5.0})), Need::Edit),
        ("GET", "/junctions", None, Need::Read),
        ("GET", "/map.geojson", None, Need::Read),
        ("GET", "/reports", None, Need::Read),
        ("GET", "/reports/1", None, Need::Read),
        ("POST", "/reports", Some(json!({"report_code": "Erosion", "ogr_fid": 101})), Need::Edit),
        ("PATCH", "/reports/1", Some(json!({"report_comments": "checked"})), Need::Edit),
        ("DELETE", "/reports/1", None, Need::Manage),
        ("POST", "/reports/resolve", Some(json!({"ids": [1]})), Need::Manage),
        ("GET", "/assignments", None, Need::Read),
        ("POST", "/assignments", Some(json!({"report_ids": [1]})), Need::Manage),
        ("POST", "/assignments/estimate", Some(json!({"report_ids": [1]})), Need::Manage),
        ("GET", "/catalog", None, Need::Read),
        ("GET", "/profiles", None, Need::Read),
        ("POST", "/route", Some(json!({"origin": 1, "dest": 5})), Need::Read),
    ];
    for public_read in [false, true] {
        for (method, uri, body, need) in &endpoints {
            for (role, token) in [("CCO", Some(CCO)), ("AM", Some(AM)), ("anonymous", None)] {
                let f = fixture(public_read);
                file_sample_reports(&f.app).await;
                let (_, before) = call(&f.app, "GET", "/health", None, None).await;
                let (s, v) = call(&f.app, method, uri, token, body.clone()).await;
                let allowed = match (role, need) {
                    ("AM", _) => true,
                    ("CCO", n) => *n != Need::Manage,
                    (_, n) => *n == Need::Read && public_read,
                };
                if allowed {
                    assert!(s.is_success(), "{role} {method} {uri} (public_read={public_read}): {s} {v}");
                } else {
                    assert_eq!(s, StatusCode::FORBIDDEN, "{role} {method} {uri} (public_read={public_read})");
                    let (_, after) = call(&f.app, "GET", "/health", None, None).await;
                    assert_eq!(before, after, "refused request changed the store");
                }
            }
        }
    }
}
