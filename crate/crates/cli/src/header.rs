use std::fmt::Display;

/// Reproducibility header: every effective setting, printed to stderr before
/// a command does any work.
pub struct Header {
    lines: Vec<(String, String)>,
}

impl Header {
    pub fn new(threads: usize) -> Self {
        let mut h = Header { lines: Vec::new() };
        h.set("version", env!("CARGO_PKG_VERSION"));
        h.set("command", std::env::args().skip(1).collect::<Vec<_>>().join(" "));
        h.set("threads", threads);
        h.set("parallel", cfg!(feature = "parallel") && threads > 1);
        h
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    /// Adds every `key=value` line of a config dump under `prefix`.
    pub fn dump(&mut self, prefix: &str, text: &str) {
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                self.set(&format!("{prefix}{k}"), v);
            }
        }
    }

    pub fn print(&self) {
        eprintln!("# gauss4d run");
        for (k, v) in &self.lines {
            eprintln!("# {k}={v}");
        }
    }
}
