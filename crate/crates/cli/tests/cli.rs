use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relat_core::Rat;
use serde_json::Value;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

fn fx(name: &str) -> String {
    format!("{FIXTURES}/{name}")
}

fn relat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relat")).args(args).env_remove("RELAT_GUARD").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    let o = relat(&a);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (code(&o), v)
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

// A validator for the JSON Schema keywords the committed schema uses.
fn check(schema: &Value, v: &Value, root: &Value, at: &str) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.strip_prefix("#/definitions/").ok_or(format!("unsupported ref {r}"))?;
        return check(&root["definitions"][name], v, root, at);
    }
    if let Some(c) = schema.get("const") {
        if c != v {
            return Err(format!("{at}: expected {c}, got {v}"));
        }
    }
    if let Some(e) = schema.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            return Err(format!("{at}: {v} not in {e:?}"));
        }
    }
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            "null" => v.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{at}: {v} is not of type {t}"));
        }
    }
    if let (Some(m), Some(n)) = (schema.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if n < m {
            return Err(format!("{at}: {n} < {m}"));
        }
    }
    if let Some(obj) = v.as_object() {
        for r in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let r = r.as_str().unwrap();
            if !obj.contains_key(r) {
                return Err(format!("{at}: missing `{r}`"));
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, x) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(s) => check(s, x, root, &format!("{at}.{k}"))?,
                None => match schema.get("additionalProperties") {
                    Some(Value::Bool(false)) => return Err(format!("{at}: unexpected `{k}`")),
                    Some(s @ Value::Object(_)) => check(s, x, root, &format!("{at}.{k}"))?,
                    _ => {}
                },
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            check(items, x, root, &format!("{at}[{i}]"))?;
        }
    }
    if let Some(alts) = schema.get("oneOf").and_then(Value::as_array) {
        let matched = alts.iter().filter(|s| check(s, v, root, at).is_ok()).count();
        if matched != 1 {
            return Err(format!("{at}: {matched} alternatives of oneOf match"));
        }
    }
    Ok(())
}

fn schema() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/output.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn validate(v: &Value) {
    let s = schema();
    check(&s, v, &s, "$").unwrap_or_else(|e| panic!("{e}\n{v:#}"));
}

#[test]
fn validator_rejects_malformed_envelopes() {
    let s = schema();
    let bad = [
        serde_json::json!({"schema_version": 2, "command": "hom", "status": "ok", "result": {"count": 0, "maps": []}}),
        serde_json::json!({"schema_version": 1, "command": "hom", "status": "ok", "result": {"count": 0}}),
        serde_json::json!({"schema_version": 1, "command": "hom", "status": "ok", "result": {"count": 0, "maps": [], "x": 1}}),
        serde_json::json!({"schema_version": 1, "command": "hom", "status": "error"}),
        serde_json::json!({"schema_version": 1, "command": "hom", "status": "ok", "result": {"count": -1, "maps": []}}),
    ];
    for v in bad {
        assert!(check(&s, &v, &s, "$").is_err(), "{v}");
    }
}

#[test]
fn derive_writes_a_proof_that_checks() {
    let out = scratch("join.rp");
    let out = out.to_str().unwrap();
    let (sv, cx) = (fx("semilattice.rv"), fx("chain.rs"));
    let goal = "le(join{x->x,y->y}, y)";
    let o = relat(&["derive", "--variety", &sv, "--context", &cx, "--goal", goal, "--depth", "3", "--proof", out]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = relat(&["check-proof", "--variety", &sv, "--context", &cx, "--proof", out]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("checks"));

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let root = doc["roots"][0].as_u64().unwrap() as usize;
    let source = &doc["nodes"][root]["source"];
    assert_eq!(source["line"], 14, "{source}");
    doc["nodes"][root]["premises"].as_array_mut().unwrap().pop();
    let bad = scratch("join-bad.rp");
    std::fs::write(&bad, doc.to_string()).unwrap();
    let (c, v) = json(&["check-proof", "--variety", &sv, "--context", &cx, "--proof", bad.to_str().unwrap()]);
    assert_eq!(c, 1);
    assert_eq!(v["result"]["valid"], false);
    validate(&v);
}

#[test]
fn equation_goals_and_relevant_scope() {
    let out = scratch("twice.rp");
    let (iv, px) = (fx("idempotent.rv"), fx("pair.rs"));
    let out = out.to_str().unwrap();
    let o = relat(&["derive", "--variety", &iv, "--context", &px, "--goal", "twice(twice(y)) = y", "--relevant", "--proof", out]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = relat(&["check-proof", "--variety", &iv, "--context", &px, "--proof", out]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = relat(&["check-proof", "--variety", &iv, "--context", &fx("point.rs"), "--proof", out]);
    assert_eq!(code(&o), 2);
}

#[test]
fn underivable_goal_exits_one() {
    let (c, v) = json(&["derive", "--variety", &fx("semilattice.rv"), "--context", &fx("pair.rs"), "--goal", "le(join(x,y), x)"]);
    assert_eq!(c, 1);
    assert_eq!(v["status"], "negative");
    assert_eq!(v["result"]["outcome"], "absent");
    validate(&v);
}

#[test]
fn reflect_collapses_a_cycle() {
    let o = relat(&["reflect", "--theory", &fx("pos.rt"), "--structure", &fx("cycle.rs")]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("3 points, quotient to 1\n"), "{text}");
    assert!(text.contains("points a\nedge le(a,a)\n"), "{text}");
    let (_, v) = json(&["reflect", "--structure", &fx("cycle.rs")]);
    assert_eq!(v["result"]["points"], serde_json::json!(["a"]));
    validate(&v);
}

/// Shortest paths over the listed distances, capped at 1.
fn closure(n: usize, listed: &[(usize, usize, Rat)]) -> Vec<Vec<Option<Rat>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(Rat::ZERO);
    }
    for &(a, b, q) in listed {
        d[a][b] = Some(q);
        d[b][a] = Some(q);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    let s = x.capped_add(y);
                    if d[i][j].is_none_or(|c| s < c) {
                        d[i][j] = Some(s);
                    }
                }
            }
        }
    }
    d
}

#[test]
fn tensor_distances_are_capped_sums() {
    let short = closure(2, &[(0, 1, Rat::frac(3, 4))]);
    let long = closure(3, &[(0, 1, Rat::frac(1, 2)), (1, 2, Rat::frac(1, 4))]);
    let (c, v) = json(&["tensor", "--theory", &fx("met.rt"), &fx("short.rs"), &fx("long.rs")]);
    assert_eq!(c, 0);
    validate(&v);
    let rows = v["result"]["distances"].as_array().unwrap();
    assert_eq!(rows.len(), 15);
    let names = |s: &str| -> (usize, usize) {
        let s = s.trim_matches(|c| c == '(' || c == ')');
        let (a, b) = s.split_once(',').unwrap();
        (["p", "q"].iter().position(|x| *x == a).unwrap(), ["u", "v", "w"].iter().position(|x| *x == b).unwrap())
    };
    let mut capped = 0;
    for r in rows {
        let (a, b) = names(r["left"].as_str().unwrap());
        let (a2, b2) = names(r["right"].as_str().unwrap());
        let sum = short[a][a2].unwrap().plus(long[b][b2].unwrap());
        let expected = if sum > Rat::ONE { Rat::ONE } else { sum };
        capped += usize::from(sum > Rat::ONE);
        assert_eq!(r["distance"], expected.to_string(), "{r}");
    }
    assert!(capped > 0);
    let text = stdout(&relat(&["tensor", &fx("short.rs"), &fx("long.rs")]));
    assert!(text.contains("d((p,u), (q,v)) = 1\n"), "{text}");
    assert!(text.contains("d((p,u), (p,w)) = 3/4\n"), "{text}");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&relat(&["check-model", "--structure", &fx("chain.rs")])), 1);
    assert_eq!(code(&relat(&["check-model", "--structure", &fx("point.rs")])), 1);
    assert_eq!(code(&relat(&["check-algebra", "--variety", &fx("semilattice.rv"), "--algebra", &fx("max.ra")])), 0);
    assert_eq!(code(&relat(&["check-algebra", "--variety", &fx("semilattice.rv"), "--algebra", &fx("min.ra")])), 1);
    assert_eq!(code(&relat(&["reflect", "--structure", "/nonexistent.rs"])), 2);
    assert_eq!(code(&relat(&["no-such-command"])), 2);
    assert_eq!(code(&relat(&["reflect"])), 2);
    assert_eq!(code(&relat(&["reflect", "--theory", "nonsense", "--structure", &fx("chain.rs")])), 2);
}

#[test]
fn parse_errors_carry_locations() {
    let bad = scratch("undeclared.rs");
    std::fs::write(&bad, "structure s over pos\npoints a b\nedge le(a,c)\n").unwrap();
    let (c, v) = json(&["reflect", "--structure", bad.to_str().unwrap()]);
    assert_eq!(c, 2);
    validate(&v);
    assert_eq!((v["error"]["line"].as_u64(), v["error"]["column"].as_u64()), (Some(3), Some(11)));
    assert!(v["error"]["message"].as_str().unwrap().contains("unknown point `c`"));
    let o = relat(&["reflect", "--structure", bad.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3, column 11"));
}

#[test]
fn guard_comes_from_flag_then_environment() {
    let args = ["hom", &fx("cycle.rs"), &fx("cycle.rs")];
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_relat"));
        cmd.args(extra).args(args).env_remove("RELAT_GUARD");
        if let Some(g) = env {
            cmd.env("RELAT_GUARD", g);
        }
        cmd.output().unwrap()
    };
    assert_eq!(code(&run(None, &[])), 0);
    let o = run(Some("5"), &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("guard"));
    assert_eq!(code(&run(Some("5"), &["--guard", "100"])), 0);
    assert_eq!(code(&run(Some("many"), &[])), 2);
}

fn every_command(tag: &str) -> Vec<Vec<String>> {
    let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<String>>();
    let proof = scratch(&format!("{tag}.rp"));
    let p = proof.to_str().unwrap();
    let (sv, cx, px) = (fx("semilattice.rv"), fx("chain.rs"), fx("pair.rs"));
    vec![
        s(&["reflect", "--structure", &fx("cycle.rs")]),
        s(&["saturate", "--structure", &fx("cycle.rs")]),
        s(&["check-model", "--structure", &fx("cycle.rs")]),
        s(&["derive", "--variety", &sv, "--context", &cx, "--goal", "le(join(x,y), y)", "--proof", p]),
        s(&["check-proof", "--variety", &sv, "--context", &cx, "--proof", p]),
        s(&["free", "--variety", &sv, "--structure", &px, "--depth", "2"]),
        s(&["check-algebra", "--variety", &sv, "--algebra", &fx("min.ra")]),
        s(&["hom", &cx, &fx("cycle.rs")]),
        s(&["tensor", &fx("short.rs"), &fx("long.rs")]),
        s(&["tensor", &cx, &px]),
        s(&["monad-laws", "--variety", &sv, "--depth", "2", &fx("point.rs"), &px, &cx]),
        s(&["extract", "--manifest", &fx("free.ro")]),
        s(&["extract", "--manifest", &fx("identity.ro")]),
        s(&["roundtrip", "--variety", &sv, "--arity", &fx("point.rs"), "--arity", &px, "--depth", "2"]),
        s(&["fuzz-proofs", "--variety", &sv, "--context", &cx, "--depth", "2", "--seed", "7", "--count", "20"]),
        s(&["free", "--variety", "/missing.rv", "--structure", &px]),
    ]
}

#[test]
fn json_output_validates_against_the_schema() {
    for args in every_command("schema") {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (c, v) = json(&refs);
        validate(&v);
        let expected = match v["status"].as_str().unwrap() {
            "ok" => 0,
            "negative" => 1,
            _ => 2,
        };
        assert_eq!(c, expected, "{args:?}");
    }
}

#[test]
fn output_is_deterministic() {
    for args in every_command("determinism") {
        for json in [false, true] {
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            if json {
                a.insert(0, "--json");
            }
            let first = relat(&a);
            let second = relat(&a);
            assert_eq!(first.stdout, second.stdout, "{a:?}");
            assert_eq!(first.status.code(), second.status.code());
        }
    }
}

#[test]
fn fuzzing_rejects_every_mutant() {
    let (c, v) = json(&["fuzz-proofs", "--variety", &fx("idempotent.rv"), "--context", &fx("pair.rs"), "--depth", "2", "--count", "30", "--seed", "11"]);
    assert_eq!(c, 0, "{v:#}");
    assert!(v["result"]["proofs"].as_u64().unwrap() > 0);
    assert!(v["result"]["mutants"].as_u64().unwrap() > 0);
    assert_eq!(v["result"]["accepted"], serde_json::json!([]));
}

#[test]
fn roundtrip_and_laws_pass_on_fixtures() {
    let (c, v) = json(&["roundtrip", "--variety", &fx("semilattice.rv"), "--arity", &fx("point.rs"), "--arity", &fx("pair.rs"), "--depth", "2"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["axioms"], serde_json::json!([6, 68, 6]));
    let (c, v) = json(&["monad-laws", "--variety", &fx("semilattice.rv"), "--depth", "2", &fx("point.rs"), &fx("chain.rs")]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["violations"], serde_json::json!([]));
}
