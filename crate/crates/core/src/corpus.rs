//! File-based ingestion of posts and user profiles.
//!
//! Posts arrive as JSON lines, each optionally carrying the post it
//! reposts (recursively). [`split_retweets`] flattens every chain into
//! independent [`Tweet`]s so that each repost is classified on its own.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on post length, in characters, after ingestion.
pub const MAX_TEXT_CHARS: usize = 280;
/// Deepest repost chain accepted by [`split_retweets`].
pub const MAX_CHAIN_DEPTH: usize = 16;
/// Profile tags kept per user.
pub const MAX_TAGS: usize = 10;

/// Serde adapter for the timezone-naive `YYYY-MM-DDTHH:MM:SS` format.
pub mod timestamp {
    use chrono::NaiveDateTime;
    use serde::{Deserialize, Deserializer, Serializer};

    pub const FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

    pub fn parse(s: &str) -> Result<NaiveDateTime, chrono::ParseError> {
        NaiveDateTime::parse_from_str(s, FORMAT)
    }

    pub fn format(ts: &NaiveDateTime) -> String {
        ts.format(FORMAT).to_string()
    }

    pub fn serialize<S: Serializer>(ts: &NaiveDateTime, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDateTime, D::Error> {
        let raw = String::deserialize(d)?;
        parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// A post as ingested, possibly wrapping the post it reposts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    pub user_id: String,
    pub text: String,
    #[serde(with = "timestamp")]
    pub created_at: NaiveDateTime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet: Option<Box<RawTweet>>,
}

impl RawTweet {
    /// Number of nested posts below this one.
    pub fn chain_depth(&self) -> usize {
        let mut depth = 0;
        let mut node = self.retweet.as_deref();
        while let Some(inner) = node {
            depth += 1;
            node = inner.retweet.as_deref();
        }
        depth
    }

    fn chain(&self) -> impl Iterator<Item = &RawTweet> {
        std::iter::successors(Some(self), |node| node.retweet.as_deref())
    }

    /// Checks ids and clamps every node's text to [`MAX_TEXT_CHARS`].
    fn sanitize(mut self) -> std::result::Result<Self, String> {
        let mut seen = HashSet::new();
        for node in self.chain() {
            if node.id.is_empty() {
                return Err("empty id".into());
            }
            if !seen.insert(node.id.as_str()) {
                return Err(format!("id `{}` repeats along the repost chain", node.id));
            }
        }
        let mut node = Some(&mut self);
        while let Some(current) = node {
            if let Some((cut, _)) = current.text.char_indices().nth(MAX_TEXT_CHARS) {
                current.text.truncate(cut);
            }
            node = current.retweet.as_deref_mut();
        }
        Ok(self)
    }
}

/// A single post with no nested repost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub user_id: String,
    pub text: String,
    #[serde(with = "timestamp")]
    pub created_at: NaiveDateTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl UserProfile {
    fn sanitize(mut self) -> std::result::Result<Self, String> {
        if self.user_id.is_empty() {
            return Err("empty user_id".into());
        }
        let mut seen = HashSet::new();
        self.tags = self
            .tags
            .into_iter()
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty() && seen.insert(t.clone()))
            .take(MAX_TAGS)
            .collect();
        Ok(self)
    }
}

/// Records parsed from a JSON-lines file plus the number of lines skipped
/// as malformed.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport<T> {
    pub records: Vec<T>,
    pub skipped: usize,
}

fn load_jsonl<T, F>(path: &Path, sanitize: F) -> Result<LoadReport<T>>
where
    T: for<'de> Deserialize<'de>,
    F: Fn(T) -> std::result::Result<T, String>,
{
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut skipped = 0;
    for (lineno, line) in bytes.split(|&b| b == b'\n').enumerate() {
        let Ok(line) = std::str::from_utf8(line) else {
            log::warn!("{}:{}: invalid UTF-8, skipped", path.display(), lineno + 1);
            skipped += 1;
            continue;
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(line)
            .map_err(|e| e.to_string())
            .and_then(&sanitize)
        {
            Ok(rec) => records.push(rec),
            Err(msg) => {
                log::warn!("{}:{}: {msg}, skipped", path.display(), lineno + 1);
                skipped += 1;
            }
        }
    }
    Ok(LoadReport { records, skipped })
}

/// Reads `tweets.jsonl`. Malformed lines are counted and skipped; an
/// unreadable file is an error.
pub fn load_tweets(path: impl AsRef<Path>) -> Result<LoadReport<RawTweet>> {
    load_jsonl(path.as_ref(), RawTweet::sanitize)
}

/// Reads `users.jsonl`. Tags are trimmed, de-duplicated and capped at
/// [`MAX_TAGS`].
pub fn load_users(path: impl AsRef<Path>) -> Result<LoadReport<UserProfile>> {
    load_jsonl(path.as_ref(), UserProfile::sanitize)
}

/// Flattened posts plus the number of input records rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub tweets: Vec<Tweet>,
    pub rejected: usize,
}

/// Flattens repost chains. The node at chain position `k` of record `id`
/// becomes the tweet `id#k`, keeping its own author, timestamp and text.
///
/// Records are rejected when the chain is deeper than [`MAX_CHAIN_DEPTH`],
/// when ids repeat along the chain, or when the root id was already seen.
pub fn split_retweets(raws: &[RawTweet]) -> Split {
    let mut tweets = Vec::with_capacity(raws.len());
    let mut roots = HashSet::new();
    let mut rejected = 0;
    for raw in raws {
        if raw.chain_depth() > MAX_CHAIN_DEPTH {
            log::warn!(
                "post {}: repost chain deeper than {MAX_CHAIN_DEPTH}, rejected",
                raw.id
            );
            rejected += 1;
            continue;
        }
        let mut chain_ids = HashSet::new();
        if !raw.chain().all(|n| chain_ids.insert(n.id.as_str())) || !roots.insert(raw.id.as_str()) {
            log::warn!("post {}: duplicate id, rejected", raw.id);
            rejected += 1;
            continue;
        }
        tweets.extend(raw.chain().enumerate().map(|(k, node)| Tweet {
            id: format!("{}#{k}", raw.id),
            user_id: node.user_id.clone(),
            text: node.text.clone(),
            created_at: node.created_at,
        }));
    }
    Split { tweets, rejected }
}

/// Keeps the first occurrence of each user, merging tags from later
/// duplicates (first-seen order, capped at [`MAX_TAGS`]).
pub fn dedupe_users(users: &[UserProfile]) -> Vec<UserProfile> {
    let mut out: Vec<UserProfile> = Vec::new();
    let mut position = std::collections::HashMap::new();
    for user in users {
        let slot = *position.entry(user.user_id.clone()).or_insert_with(|| {
            out.push(UserProfile {
                user_id: user.user_id.clone(),
                tags: Vec::new(),
            });
            out.len() - 1
        });
        let merged = &mut out[slot].tags;
        for tag in &user.tags {
            if merged.len() >= MAX_TAGS {
                break;
            }
            if !tag.is_empty() && !merged.contains(tag) {
                merged.push(tag.clone());
            }
        }
    }
    out
}

/// Serializes records as JSON lines.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(rec).expect("plain data serializes"));
        out.push('\n');
    }
    out
}
