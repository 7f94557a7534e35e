use thiserror::Error;

use crate::trainer::TrainConfig;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: bad value {value:?} for {key}")]
    BadValue { line: usize, key: String, value: String },
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "on" | "yes" | "1" => Some(true),
        "false" | "off" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// Sets one field from its textual value. Keys accept `-` or `_`.
pub fn set_key(config: &mut TrainConfig, key: &str, value: &str) -> Result<(), String> {
    fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
        v.parse().map_err(|_| String::new())
    }
    let flag = |v: &str| parse_bool(v).ok_or_else(String::new);
    match key.replace('-', "_").as_str() {
        "lr" | "learning_rate" => config.lr = num(value)?,
        "batch_size" => config.batch_size = num(value)?,
        "epochs" => config.epochs = num(value)?,
        "optimizer" => config.optimizer = value.parse().map_err(|_| String::new())?,
        "attention" => config.attention = flag(value)?,
        "dropout" | "dropout_rate" => config.dropout = num(value)?,
        "bidirectional" => config.bidirectional = flag(value)?,
        "seed" => config.seed = num(value)?,
        "max_len" => config.max_len = num(value)?,
        "hidden" => config.hidden = num(value)?,
        "attn" | "attention_size" => config.attn = num(value)?,
        "min_count" => config.min_count = num(value)?,
        "embed_dim" => config.embed_dim = num(value)?,
        "freeze_embeddings" => config.freeze_embeddings = flag(value)?,
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}

/// Applies a flat `key = value` file on top of `config`. `#` starts a comment.
pub fn apply_config_text(config: &mut TrainConfig, text: &str) -> Result<(), ConfigError> {
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line });
        };
        let (key, value) = (key.trim(), value.trim());
        set_key(config, key, value).map_err(|e| {
            if e.is_empty() {
                ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    value: value.to_string(),
                }
            } else {
                ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                }
            }
        })?;
    }
    Ok(())
}
