//! Run manifests: every output carries the command, flag set, seed, tool
//! version and input digests, so identical manifests reproduce
//! byte-identical CSV.

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub flags: Vec<String>,
    pub seed: u64,
    pub version: String,
    /// (path, sha256 of contents)
    pub inputs: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str, flags: &[String], seed: u64) -> Self {
        Self {
            command: command.to_string(),
            flags: flags.to_vec(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &str, contents: &[u8]) {
        self.inputs.push((path.to_string(), sha256_hex(contents)));
    }

    /// Canonical single-line rendering.
    pub fn render(&self) -> String {
        let flags = self
            .flags
            .iter()
            .map(|f| f.replace('\\', "\\\\").replace('"', "\\\""))
            .collect::<Vec<_>>()
            .join(" ");
        let inputs = self
            .inputs
            .iter()
            .map(|(p, d)| format!("{{\"path\":\"{p}\",\"sha256\":\"{d}\"}}"))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{{\"command\":\"{}\",\"flags\":\"{}\",\"seed\":{},\"version\":\"{}\",\"inputs\":[{}]}}",
            self.command, flags, self.seed, self.version, inputs
        )
    }

    /// Short digest carried by every CSV row.
    pub fn digest(&self) -> String {
        sha256_hex(self.render().as_bytes())[..16].to_string()
    }
}

/// Fixed 12-significant-digit decimal formatting for CSV values.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // trim trailing zeros but keep at least one digit
        let t = s.trim_end_matches('0').trim_end_matches('.');
        t.to_string()
    } else {
        format!("{x:.11e}")
    }
}
