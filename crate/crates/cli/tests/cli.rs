use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::process::{Child, Command, Output, Stdio};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn qmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmt"))
        .args(args)
        .env_remove("QMT_PORT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Server {
    child: Child,
    addr: String,
}

impl Server {
    fn start(libs: &[PathBuf], port_env: Option<&str>) -> Server {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qmt"));
        cmd.arg("serve").args(libs).args(["--port", "0"]);
        match port_env {
            Some(p) => cmd.env("QMT_PORT", p),
            None => cmd.env_remove("QMT_PORT"),
        };
        let mut child = cmd.stdout(Stdio::piped()).stderr(Stdio::null()).spawn().unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on http://")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_owned();
        Server { child, addr }
    }

    /// Sends one HTTP/1.1 request and returns (status, headers, body).
    fn request(&self, method: &str, path: &str, headers: &[(&str, &str)], body: &str) -> (u16, String, String) {
        let mut s = TcpStream::connect(&self.addr).unwrap();
        let mut req = format!(
            "{method} {path} HTTP/1.1\r\nHost: {}\r\nConnection: close\r\nContent-Length: {}\r\n",
            self.addr,
            body.len()
        );
        for (k, v) in headers {
            req.push_str(&format!("{k}: {v}\r\n"));
        }
        req.push_str("\r\n");
        req.push_str(body);
        s.write_all(req.as_bytes()).unwrap();
        let mut raw = Vec::new();
        s.read_to_end(&mut raw).unwrap();
        let raw = String::from_utf8(raw).unwrap();
        let (head, body) = raw.split_once("\r\n\r\n").expect("complete response");
        let status = head.split(' ').nth(1).unwrap().parse().unwrap();
        (status, head.to_ascii_lowercase(), body.to_owned())
    }

    fn post(&self, body: &str) -> (u16, String, String) {
        self.request("POST", "/query", &[], body)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[test]
fn check_reports_counts() {
    let o = qmt(&["check", fixture("chain.json").to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("theories  3"), "{out}");
    assert!(out.contains("views     1"), "{out}");
}

#[test]
fn check_rejects_duplicate_uris() {
    let o = qmt(&["check", fixture("duplicate.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DuplicateUri"));
}

#[test]
fn eval_include_example_lists_transitive_includers() {
    let o = qmt(&[
        "eval",
        fixture("chain.json").to_str().unwrap(),
        fixture("include.qmt").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    // includes is reflexive, so A counts among its own includers.
    assert_eq!(stdout(&o), "# {uri} (3 elements)\nurn:ex?A\nurn:ex?B\nurn:ex?C\n");
}

#[test]
fn eval_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let lib = fixture("chain.json");
    let lib = lib.to_str().unwrap();
    let write = |name: &str, src: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, src).unwrap();
        p.to_str().unwrap().to_owned()
    };
    let strict = write("strict.qmt", "{x in constant | defOF(x) = defOF(x)}");
    let o = qmt(&["eval", lib, &strict]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("error: defOF("));
    let o = qmt(&["eval", lib, &strict, "--lenient-filter", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#"{"uri":"urn:ex?C?c"}"#));
    let bad = write("bad.qmt", "theory.0");
    assert_eq!(qmt(&["eval", lib, &bad]).status.code(), Some(2));
    let ill = write("ill.qmt", "typeOF(theory)");
    let o = qmt(&["eval", lib, &ill]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("type error"));
    let all = write("all.qmt", "constant");
    assert_eq!(qmt(&["eval", lib, &all, "--max-results", "2"]).status.code(), Some(4));
}

#[test]
fn index_cache_roundtrip_and_staleness() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("chain.idx");
    let lib = fixture("chain.json");
    let o = qmt(&["index", lib.to_str().unwrap(), "--out", cache.to_str().unwrap()]);
    assert!(o.status.success());
    let q = fixture("include.qmt");
    let direct = qmt(&["eval", lib.to_str().unwrap(), q.to_str().unwrap()]);
    let cached = qmt(&[
        "eval",
        lib.to_str().unwrap(),
        q.to_str().unwrap(),
        "--index",
        cache.to_str().unwrap(),
    ]);
    assert!(cached.status.success());
    assert_eq!(direct.stdout, cached.stdout);
    let other = fixture("one_a.json");
    let stale = qmt(&[
        "eval",
        other.to_str().unwrap(),
        q.to_str().unwrap(),
        "--index",
        cache.to_str().unwrap(),
    ]);
    assert_eq!(stale.status.code(), Some(1));
}

#[test]
fn http_and_cli_results_are_byte_identical() {
    let lib = fixture("chain.json");
    let server = Server::start(std::slice::from_ref(&lib), None);
    let dir = tempfile::tempdir().unwrap();
    let docs = [
        ("a.xml", r#"<concept name="theory"/>"#),
        ("b.json", r#"{"query": "{ (v, x, y) : v in view, x in domain of v, y in codomain of v }"}"#),
        ("c.qmt", "union y in theory . { (x, y) : x in includes+ of y }"),
        ("d.qmt", "{x in constant | defOF(x) = defOF(x)}"),
        ("e.json", r#"{"query": "typeOF(theory)"}"#),
    ];
    for (name, src) in docs {
        let path = dir.path().join(name);
        std::fs::write(&path, src).unwrap();
        let cli = qmt(&["eval", lib.to_str().unwrap(), path.to_str().unwrap()]);
        let (_, _, body) = server.post(src);
        assert_eq!(stdout(&cli), body, "{name}");
    }
}

#[test]
fn http_status_codes_and_endpoints() {
    let server = Server::start(&[fixture("chain.json")], None);
    let (status, head, body) = server.post(r#"<concept name="theory"/>"#);
    assert_eq!(status, 200);
    assert!(head.contains("content-type: application/xml"), "{head}");
    assert!(body.contains("<uri>urn:ex?A</uri><uri>urn:ex?B</uri><uri>urn:ex?C</uri>"), "{body}");

    let (status, _, body) = server.post(r#"<apply fun="typeOF"><concept name="theory"/></apply>"#);
    assert_eq!(status, 400);
    assert!(body.contains(r#"kind="type""#) && body.contains("path=\"$"), "{body}");

    let (status, _, _) = server.post("<frob/>");
    assert_eq!(status, 400);

    let (status, head, body) = server.request("POST", "/query", &[("Accept", "application/json")], "theory");
    assert_eq!(status, 200);
    assert!(head.contains("content-type: application/json"), "{head}");
    assert!(body.starts_with(r#"{"outcome":"ok""#), "{body}");

    let (status, _, body) = server.request("GET", "/health", &[], "");
    assert_eq!((status, body.as_str()), (200, "ok\n"));

    let (status, _, body) = server.request("GET", "/signature", &[], "");
    assert_eq!(status, 200);
    assert!(body.starts_with("<signature"), "{body}");
    assert!(body.contains(r#"<relation name="includes" from="uri" to="uri"/>"#), "{body}");
}

#[test]
fn http_reports_oversized_results() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qmt"))
        .args(["serve", fixture("chain.json").to_str().unwrap(), "--port", "0", "--max-results", "2"])
        .env_remove("QMT_PORT")
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let server = Server {
        child,
        addr: line.trim().trim_start_matches("listening on http://").to_owned(),
    };
    let (status, _, body) = server.post("constant");
    assert_eq!(status, 413);
    assert!(body.contains("too-large"), "{body}");
    assert_eq!(server.post("view").0, 200);
}

#[test]
fn queries_span_all_registered_libraries() {
    let server = Server::start(&[fixture("one_a.json"), fixture("one_b.json")], None);
    let (status, _, body) = server.post("constant");
    assert_eq!(status, 200);
    assert_eq!(body, "# {uri} (2 elements)\nurn:one?A?x\nurn:one?B?y\n");
}

#[test]
fn port_environment_variable_overrides_flag() {
    let probe = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = probe.local_addr().unwrap().port();
    drop(probe);
    let server = Server::start(&[fixture("one_a.json")], Some(&port.to_string()));
    assert_eq!(server.addr, format!("127.0.0.1:{port}"));
    assert_eq!(server.request("GET", "/health", &[], "").0, 200);
}
