use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Default, Serialize)]
pub struct Runtime {
    pub elapsed_ms: u128,
    /// `hit`, `miss` or `disabled` for commands that consult the cache.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<String>,
}

/// Machine-readable outcome of one command. Everything but `runtime` is a function of
/// the inputs.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub inputs: String,
    pub verdicts: Map<String, Value>,
    pub certificates: Map<String, Value>,
    /// Internal consistency failures; a nonempty list is exit status 2.
    pub invariant_violations: Vec<String>,
    pub runtime: Runtime,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Report {
    pub fn new(command: &str, inputs: String) -> Self {
        Report {
            command: command.into(),
            inputs_digest: sha256_hex(format!("{command}\n{inputs}").as_bytes()),
            inputs,
            verdicts: Map::new(),
            certificates: Map::new(),
            invariant_violations: vec![],
            runtime: Runtime::default(),
        }
    }

    pub fn verdict(&mut self, key: &str, v: impl Serialize) {
        self.verdicts.insert(key.into(), serde_json::to_value(v).expect("verdicts serialize"));
    }

    pub fn certificate(&mut self, key: &str, v: impl Serialize) {
        self.certificates.insert(key.into(), serde_json::to_value(v).expect("certificates serialize"));
    }

    pub fn require(&mut self, ok: bool, what: &str) {
        if !ok {
            self.invariant_violations.push(what.into());
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report without `runtime`; byte-identical across runs on the same inputs.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        v.as_object_mut().unwrap().remove("runtime");
        serde_json::to_string_pretty(&v).unwrap()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}  (inputs {})\n", self.command, &self.inputs_digest[..12]);
        for (k, v) in &self.verdicts {
            out.push_str(&format!("  {k}: {}\n", compact(v)));
        }
        if !self.certificates.is_empty() {
            let keys: Vec<&str> = self.certificates.keys().map(|k| k.as_str()).collect();
            out.push_str(&format!("  certificates: {}\n", keys.join(", ")));
        }
        for v in &self.invariant_violations {
            out.push_str(&format!("  INVARIANT VIOLATED: {v}\n"));
        }
        out
    }
}

fn compact(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 160 {
        format!("{}…", &s[..s.char_indices().take_while(|(i, _)| *i < 157).last().map_or(0, |(i, c)| i + c.len_utf8())])
    } else {
        s
    }
}
