//! Text normalization: simplification, entity stripping, segmentation,
//! stop-word removal and advertisement filtering.

use std::sync::LazyLock;

use chrono::NaiveDateTime;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{timestamp, Tweet};
use crate::error::{Error, Result};
use crate::resources::{CharMap, Resources, TermList};
use crate::stance::Stance;

/// Longest lexicon entry, in characters, considered by [`segment`].
pub const MAX_ENTRY_CHARS: usize = 8;

/// A preprocessed post: its token sequence plus provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub tweet_id: String,
    pub user_id: String,
    #[serde(with = "timestamp")]
    pub created_at: NaiveDateTime,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Stance>,
}

/// Parses document JSON lines, as written by [`crate::corpus::to_jsonl`].
/// Unlike raw corpus input, documents are produced by this crate, so a
/// malformed line is an error rather than skipped.
pub fn documents_from_jsonl(source_name: &str, text: &str) -> Result<Vec<Document>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::parse(source_name, i + 1, e.to_string()))
        })
        .collect()
}

pub fn to_simplified(text: &str, map: &CharMap) -> String {
    text.chars().map(|c| map.get(c).unwrap_or(c)).collect()
}

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"https?://\S+").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@[^\s\p{P}]{0,30}").unwrap());
static BRACKET_EMOTICON: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\[[^\[\]]{0,8}\]").unwrap());
static ASCII_EMOTICON: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r":-\)|:\)|:-\(|:\(").unwrap());
static MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new("转发微博|回复").unwrap());
static WHITESPACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").unwrap());
static PUNCT_OR_SPACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[\s\p{P}]+$").unwrap());

/// Removes URLs, @-mentions, bracketed emoticon codes such as `[哈哈]`,
/// ASCII emoticons and platform marker words, then collapses whitespace.
pub fn strip_entities(text: &str) -> String {
    let mut out = text.to_string();
    for re in [
        &*URL,
        &*MENTION,
        &*BRACKET_EMOTICON,
        &*ASCII_EMOTICON,
        &*MARKER,
    ] {
        if let std::borrow::Cow::Owned(s) = re.replace_all(&out, "") {
            out = s;
        }
    }
    WHITESPACE.replace_all(&out, " ").trim().to_string()
}

/// Forward maximum matching: at each position take the longest lexicon
/// entry (up to [`MAX_ENTRY_CHARS`] characters) prefixing the remainder,
/// or a single character when nothing matches. The tokens concatenate
/// back to `text`.
pub fn segment(text: &str, lexicon: &TermList) -> Vec<String> {
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n_chars = bounds.len() - 1;
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < n_chars {
        let longest = MAX_ENTRY_CHARS.min(n_chars - pos);
        let take = (2..=longest)
            .rev()
            .find(|&len| lexicon.contains(&text[bounds[pos]..bounds[pos + len]]))
            .unwrap_or(1);
        tokens.push(text[bounds[pos]..bounds[pos + take]].to_string());
        pos += take;
    }
    tokens
}

/// Drops stop words and tokens made only of punctuation or whitespace.
pub fn remove_stopwords(tokens: Vec<String>, stoplist: &TermList) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stoplist.contains(t) && !PUNCT_OR_SPACE.is_match(t))
        .collect()
}

pub fn is_advertisement<S: AsRef<str>>(tokens: &[S], adlist: &TermList) -> bool {
    tokens.iter().any(|t| adlist.contains(t.as_ref()))
}

/// Runs the five normalization steps in order. Returns `None` for
/// advertisements and for posts left with no tokens.
pub fn preprocess_tweet(tweet: &Tweet, res: &Resources) -> Option<Document> {
    let text = to_simplified(&tweet.text, &res.char_map);
    let text = strip_entities(&text);
    let tokens = remove_stopwords(segment(&text, &res.segmentation), &res.stopwords);
    if tokens.is_empty() || is_advertisement(&tokens, &res.ad_keywords) {
        return None;
    }
    Some(Document {
        tweet_id: tweet.id.clone(),
        user_id: tweet.user_id.clone(),
        created_at: tweet.created_at,
        tokens,
        label: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn terms(list: &[&str]) -> TermList {
        list.iter().copied().collect()
    }

    fn toks(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn document_jsonl_round_trip() {
        let doc = Document {
            tweet_id: "1#0".into(),
            user_id: "u".into(),
            created_at: timestamp::parse("2013-11-02T08:00:00").unwrap(),
            tokens: toks(&["中医", "针灸"]),
            label: Some(Stance::Opposing),
        };
        let text = crate::corpus::to_jsonl(std::slice::from_ref(&doc));
        assert_eq!(documents_from_jsonl("d", &text).unwrap(), vec![doc]);
        let err = documents_from_jsonl("d", &format!("{text}{{oops\n")).unwrap_err();
        assert!(err.to_string().contains(":2"), "{err}");
    }

    fn tweet(text: &str) -> Tweet {
        Tweet {
            id: "t#0".into(),
            user_id: "u".into(),
            text: text.into(),
            created_at: timestamp::parse("2013-11-02T08:00:00").unwrap(),
        }
    }

    #[test]
    fn simplification() {
        let map = CharMap::parse("m", "醫\t医\n").unwrap();
        assert_eq!(to_simplified("醫生", &map), "医生");
        assert_eq!(to_simplified("", &map), "");
        assert_eq!(to_simplified("abc", &map), "abc");
    }

    #[test]
    fn entity_stripping() {
        assert_eq!(strip_entities("@shen 看 http://t.cn/ab1"), "看");
        assert_eq!(strip_entities("好[哈哈]棒"), "好棒");
        assert_eq!(strip_entities("平文"), "平文");
        assert_eq!(strip_entities("转发微博 中医 :) 好 :-("), "中医 好");
        assert_eq!(strip_entities("回复@李四:针灸"), ":针灸");
        assert_eq!(
            strip_entities("[这个括号里面超过八个字符]"),
            "[这个括号里面超过八个字符]"
        );
        assert_eq!(strip_entities("  a \t\n b  "), "a b");
    }

    #[test]
    fn segmentation_examples() {
        assert_eq!(
            segment("中医爱好", &terms(&["中医", "爱好"])),
            toks(&["中医", "爱好"])
        );
        assert_eq!(
            segment("中医药大学", &terms(&["中医", "中医药", "大学"])),
            toks(&["中医药", "大学"])
        );
        assert_eq!(segment("X中医", &terms(&["中医"])), toks(&["X", "中医"]));
        assert!(segment("", &terms(&["中医"])).is_empty());
    }

    #[test]
    fn segmentation_ignores_overlong_entries() {
        let long = "一二三四五六七八九";
        assert_eq!(segment(long, &terms(&[long])).len(), 9);
        let eight = "一二三四五六七八";
        assert_eq!(segment(eight, &terms(&[eight])), toks(&[eight]));
    }

    #[test]
    fn stopword_removal() {
        assert_eq!(
            remove_stopwords(toks(&["哦", "中医"]), &terms(&["哦"])),
            toks(&["中医"])
        );
        assert!(remove_stopwords(vec![], &terms(&["哦"])).is_empty());
        assert_eq!(
            remove_stopwords(toks(&["中医"]), &TermList::new()),
            toks(&["中医"])
        );
        assert_eq!(
            remove_stopwords(toks(&["，", " ", "!?", "中医", "a"]), &TermList::new()),
            toks(&["中医", "a"])
        );
    }

    #[test]
    fn advertisement_detection() {
        assert!(is_advertisement(&toks(&["大", "促销"]), &terms(&["促销"])));
        assert!(!is_advertisement(&toks(&["中医"]), &terms(&["促销"])));
        assert!(!is_advertisement(&toks(&["促销"]), &TermList::new()));
    }

    #[test]
    fn full_pipeline() {
        let res = Resources::builtin();
        let doc = preprocess_tweet(&tweet("@a 中医爱好 http://x.co"), &res).unwrap();
        assert_eq!(doc.tokens, toks(&["中医", "爱好"]));
        assert_eq!(doc.label, None);
        assert_eq!(doc.tweet_id, "t#0");

        assert!(preprocess_tweet(&tweet("中药 大促销"), &res).is_none());
        assert!(preprocess_tweet(&tweet("@a http://x.co [哈哈]"), &res).is_none());
        assert!(preprocess_tweet(&tweet("哦，哦！"), &res).is_none());

        let doc = preprocess_tweet(&tweet("中醫 鍼灸 養生"), &res).unwrap();
        assert_eq!(doc.tokens, toks(&["中医", "针灸", "养生"]));
    }

    #[test]
    fn document_json_shape() {
        let mut doc = preprocess_tweet(&tweet("中医 针灸"), &Resources::builtin()).unwrap();
        let plain = serde_json::to_string(&doc).unwrap();
        assert!(!plain.contains("label"));
        doc.label = Some(Stance::Opposing);
        let labeled = serde_json::to_string(&doc).unwrap();
        assert!(labeled.contains(r#""label":"oppose""#));
        assert_eq!(serde_json::from_str::<Document>(&labeled).unwrap(), doc);
    }

    proptest! {
        #[test]
        fn segmentation_concatenates_to_input(text in any::<String>(), words in prop::collection::vec("[中医药针灸a-c]{1,4}", 0..12)) {
            let lex: TermList = words.iter().map(String::as_str).collect();
            prop_assert_eq!(segment(&text, &lex).concat(), text);
        }

        #[test]
        fn stripping_never_grows(text in any::<String>()) {
            prop_assert!(strip_entities(&text).chars().count() <= text.chars().count());
        }

        #[test]
        fn simplification_is_idempotent_with_disjoint_map(text in "[醫藥針医药针a ]{0,20}") {
            let map = CharMap::parse("m", "醫\t医\n藥\t药\n針\t针\n").unwrap();
            let once = to_simplified(&text, &map);
            prop_assert_eq!(to_simplified(&once, &map), once.clone());
            prop_assert_eq!(once.chars().count(), text.chars().count());
        }
    }
}
