//! Policy files: flat `key=value` lines.
//!
//! ```text
//! # applies to every client
//! mode=reach                  # reach | strict
//! third_party_override=false
//! prompt=false
//! comment_url_context=false
//! # applies to client alice only
//! client.alice.mode=strict
//! ```

use std::collections::BTreeMap;

use statejar::{PolicyConfig, PrivacyMode};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicyFile {
    pub default: PolicyConfig,
    pub clients: BTreeMap<String, PolicyConfig>,
}

impl PolicyFile {
    pub fn parse(text: &str) -> Result<PolicyFile, String> {
        let mut file = PolicyFile::default();
        let mut per_client: Vec<(String, String, String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {line_no}: expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(rest) = key.strip_prefix("client.") {
                let (client, field) = rest
                    .rsplit_once('.')
                    .ok_or_else(|| format!("line {line_no}: expected client.<id>.<key>"))?;
                per_client.push((client.to_string(), field.to_string(), value.to_string(), line_no));
            } else {
                apply(&mut file.default, key, value).map_err(|e| format!("line {line_no}: {e}"))?;
            }
        }
        // client entries start from the finished defaults wherever they appear
        for (client, field, value, line_no) in per_client {
            let base = file.default;
            let cfg = file.clients.entry(client).or_insert(base);
            apply(cfg, &field, &value).map_err(|e| format!("line {line_no}: {e}"))?;
        }
        Ok(file)
    }
}

fn flag(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {value:?}")),
    }
}

fn apply(cfg: &mut PolicyConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "mode" => {
            cfg.mode = match value {
                "reach" => PrivacyMode::ReachBased,
                "strict" => PrivacyMode::Rfc2109Strict,
                _ => return Err(format!("mode must be reach or strict, got {value:?}")),
            }
        }
        "third_party_override" => cfg.third_party_override = flag(value)?,
        "prompt" => cfg.prompt_enabled = flag(value)?,
        "comment_url_context" => cfg.comment_url_context = flag(value)?,
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}
