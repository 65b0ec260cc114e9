//! Seeded synthetic corpus generator.
//!
//! Users get stance-consistent profile tags from the tag lexicon. Their
//! posts mix shared vocabulary with class-specific keywords; on-topic
//! posts always carry at least two distinct terminology terms. Posts are
//! decorated with mentions, URLs, emoticon codes, stop words and
//! occasional traditional characters so the whole preprocessing chain is
//! exercised. The same config and seed always produce identical output.
//!
//! Vocabulary beyond the seed word lists is filled with single CJK
//! Extension A characters: they are absent from every shipped resource and
//! survive segmentation as single-character tokens.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{Months, NaiveDate, NaiveDateTime, TimeDelta};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{RawTweet, UserProfile};
use crate::error::{Error, Result};
use crate::resources::{builtin, TagLexicon, TermList};
use crate::stance::Stance;

/// Supporting-class keywords, strongest first.
pub const SUPPORT_KEYWORDS: &[&str] = &[
    "中药",
    "养生",
    "国家",
    "科学",
    "中医药",
    "中国",
    "身体",
    "医生",
    "健康",
    "治疗",
    "食物",
    "饮食",
    "文化",
    "传统",
    "经验",
    "效果",
];

/// Opposing-class keywords, strongest first.
pub const OPPOSE_KEYWORDS: &[&str] = &[
    "中成药",
    "马兜铃酸",
    "注射",
    "注射液",
    "方舟子",
    "朱砂",
    "事件",
    "反对",
    "马兜铃",
    "龙胆泻肝丸",
    "毒性",
    "肾毒性",
    "肝损伤",
    "不良反应",
    "重金属",
    "伪科学",
];

const SHARED_WORDS: &[&str] = &[
    "今天", "明天", "昨天", "现在", "时间", "天气", "朋友", "家人", "孩子", "父母", "老人", "大家",
    "我们", "自己", "觉得", "知道", "希望", "喜欢", "认为", "应该", "需要", "问题", "生活", "工作",
    "学习", "休息", "运动", "早上", "晚上", "医院", "病人", "感冒", "发烧", "咳嗽", "研究", "医学",
    "西医", "西药", "现代", "社会", "新闻", "网友", "微博", "分享", "讨论",
];

/// Leading keywords are drawn with this probability; otherwise uniformly
/// from the whole class pool.
const KEYWORD_HEAD: usize = 10;
const HEAD_PROBABILITY: f64 = 0.5;
const FILLER_POOL: u32 = 0x600;
const FILLER_BASE: [u32; 3] = [0x3400, 0x3A00, 0x4000];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_users_pos: usize,
    pub n_users_neg: usize,
    /// Inclusive range of posts per user.
    pub tweets_per_user: (usize, usize),
    pub vocab_shared: usize,
    pub vocab_pos: usize,
    pub vocab_neg: usize,
    /// Probability that an on-topic post contains class-specific terms.
    pub signal_strength: f64,
    /// Probability that a user's tag set is empty.
    pub tag_noise: f64,
    /// Probability that a post draws its class terms from the other class
    /// while keeping its author's gold stance.
    pub label_noise: f64,
    pub off_topic_rate: f64,
    pub ad_rate: f64,
    /// Probability that a post reposts an earlier post by another user.
    pub retweet_rate: f64,
    /// Probability that a post is rendered in traditional characters.
    pub traditional_rate: f64,
    /// First month of the timestamp range as (year, month).
    pub start: (i32, u32),
    pub months: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_users_pos: 187,
            n_users_neg: 29,
            tweets_per_user: (10, 30),
            vocab_shared: 200,
            vocab_pos: 40,
            vocab_neg: 40,
            signal_strength: 0.8,
            tag_noise: 0.1,
            label_noise: 0.0,
            off_topic_rate: 0.05,
            ad_rate: 0.02,
            retweet_rate: 0.1,
            traditional_rate: 0.05,
            start: (2012, 1),
            months: 24,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.n_users_pos == 0 || self.n_users_neg == 0 {
            return bad("both user counts must be at least 1".into());
        }
        let (lo, hi) = self.tweets_per_user;
        if lo == 0 || lo > hi {
            return bad(format!("invalid tweets-per-user range {lo}..={hi}"));
        }
        if !(self.signal_strength > 0.0 && self.signal_strength <= 1.0) {
            return bad(format!(
                "signal_strength must lie in (0, 1], got {}",
                self.signal_strength
            ));
        }
        for (name, p) in [
            ("tag_noise", self.tag_noise),
            ("label_noise", self.label_noise),
            ("off_topic_rate", self.off_topic_rate),
            ("ad_rate", self.ad_rate),
            ("retweet_rate", self.retweet_rate),
            ("traditional_rate", self.traditional_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        for (name, n, seeds) in [
            ("vocab_shared", self.vocab_shared, SHARED_WORDS.len()),
            ("vocab_pos", self.vocab_pos, SUPPORT_KEYWORDS.len()),
            ("vocab_neg", self.vocab_neg, OPPOSE_KEYWORDS.len()),
        ] {
            if n == 0 || n > seeds + FILLER_POOL as usize {
                return bad(format!(
                    "{name} must lie in 1..={}",
                    seeds + FILLER_POOL as usize
                ));
            }
        }
        if self.months == 0 || NaiveDate::from_ymd_opt(self.start.0, self.start.1, 1).is_none() {
            return bad("invalid month range".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub tweets: Vec<RawTweet>,
    pub users: Vec<UserProfile>,
    /// Gold stance per flattened post id (`<id>#<chain position>`).
    pub gold: Vec<(String, Stance)>,
    pub user_stances: BTreeMap<String, Stance>,
}

impl SynthCorpus {
    pub fn tweets_jsonl(&self) -> String {
        crate::corpus::to_jsonl(&self.tweets)
    }

    pub fn users_jsonl(&self) -> String {
        crate::corpus::to_jsonl(&self.users)
    }

    /// `tweet_id \t stance` per flattened post.
    pub fn gold_tsv(&self) -> String {
        let mut out = String::new();
        for (id, s) in &self.gold {
            let _ = writeln!(out, "{id}\t{s}");
        }
        out
    }
}

/// Shared, Supporting and Opposing vocabularies for a config.
pub fn vocabularies(cfg: &SynthConfig) -> [Vec<String>; 3] {
    let build = |seeds: &[&str], n: usize, base: u32| -> Vec<String> {
        seeds
            .iter()
            .map(|s| s.to_string())
            .chain((0..).map(|i| {
                char::from_u32(base + i)
                    .expect("extension A code point")
                    .to_string()
            }))
            .take(n)
            .collect()
    };
    [
        build(SHARED_WORDS, cfg.vocab_shared, FILLER_BASE[0]),
        build(SUPPORT_KEYWORDS, cfg.vocab_pos, FILLER_BASE[1]),
        build(OPPOSE_KEYWORDS, cfg.vocab_neg, FILLER_BASE[2]),
    ]
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    shared: Vec<String>,
    pos: Vec<String>,
    neg: Vec<String>,
    topic_terms: Vec<String>,
    search_tags: Vec<String>,
    tags: TagLexicon,
    ads: Vec<String>,
    to_traditional: BTreeMap<char, char>,
    start: NaiveDateTime,
    span_secs: i64,
}

impl Generator<'_> {
    fn pick_class_term(&mut self, stance: Stance) -> String {
        let pool = match stance {
            Stance::Supporting => &self.pos,
            Stance::Opposing => &self.neg,
        };
        let head = pool.len().min(KEYWORD_HEAD);
        let idx = if self.rng.gen_bool(HEAD_PROBABILITY) {
            self.rng.gen_range(0..head)
        } else {
            self.rng.gen_range(0..pool.len())
        };
        pool[idx].clone()
    }

    fn timestamp(&mut self) -> NaiveDateTime {
        self.start + TimeDelta::seconds(self.rng.gen_range(0..self.span_secs))
    }

    fn profile(&mut self, user_id: &str, stance: Stance) -> Vec<UserProfile> {
        if self.rng.gen_bool(self.cfg.tag_noise) {
            return vec![UserProfile {
                user_id: user_id.into(),
                tags: Vec::new(),
            }];
        }
        let stance_tags: Vec<String> = self.tags.tags_for(stance).map(str::to_string).collect();
        let n_stance = self.rng.gen_range(1..=2);
        let mut tags: Vec<String> = stance_tags
            .choose_multiple(&mut self.rng, n_stance)
            .cloned()
            .collect();
        let n_search = self.rng.gen_range(0..=2);
        for t in self.search_tags.choose_multiple(&mut self.rng, n_search) {
            tags.push(t.clone());
        }
        tags.shuffle(&mut self.rng);
        if tags.len() >= 2 && self.rng.gen_bool(0.1) {
            let second = tags.split_off(tags.len() / 2);
            return vec![
                UserProfile {
                    user_id: user_id.into(),
                    tags,
                },
                UserProfile {
                    user_id: user_id.into(),
                    tags: second,
                },
            ];
        }
        vec![UserProfile {
            user_id: user_id.into(),
            tags,
        }]
    }

    fn text(&mut self, stance: Stance) -> String {
        let mut words: Vec<String> = Vec::new();
        let off_topic = self.rng.gen_bool(self.cfg.off_topic_rate);
        if !off_topic {
            let n_topic = self.rng.gen_range(2..=3);
            words.extend(
                self.topic_terms
                    .choose_multiple(&mut self.rng, n_topic)
                    .cloned(),
            );
            if self.rng.gen_bool(self.cfg.signal_strength) {
                let source = if self.rng.gen_bool(self.cfg.label_noise) {
                    stance.opposite()
                } else {
                    stance
                };
                for _ in 0..self.rng.gen_range(1..=3) {
                    let term = self.pick_class_term(source);
                    words.push(term);
                }
            }
        }
        for _ in 0..self.rng.gen_range(3..=8) {
            words.extend(self.shared.choose(&mut self.rng).cloned());
        }
        if self.rng.gen_bool(self.cfg.ad_rate) {
            words.extend(self.ads.choose(&mut self.rng).cloned());
        }
        words.shuffle(&mut self.rng);

        let mut text = String::new();
        if self.rng.gen_bool(0.2) {
            let _ = write!(text, "@u{:04} ", self.rng.gen_range(0..1000));
        }
        if self.rng.gen_bool(0.1) {
            text.push_str("转发微博 ");
        }
        text.push_str(&words.join(" "));
        if self.rng.gen_bool(0.15) {
            text.push_str(["[哈哈]", "[爱你]", " :)", "[怒]", " :("][self.rng.gen_range(0..5)]);
        }
        if self.rng.gen_bool(0.2) {
            text.push_str(" 哦");
        }
        if self.rng.gen_bool(0.2) {
            let _ = write!(text, " http://t.cn/{:x}", self.rng.gen::<u32>());
        }
        if self.rng.gen_bool(self.cfg.traditional_rate) {
            text = text
                .chars()
                .map(|c| *self.to_traditional.get(&c).unwrap_or(&c))
                .collect();
        }
        text
    }
}

/// Generates a corpus. Every random choice flows from `cfg.seed`.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let [shared, pos, neg] = vocabularies(cfg);
    let terminology = TermList::parse(builtin::TERMINOLOGY);
    let topic_terms: Vec<String> = terminology
        .iter()
        .filter(|t| !pos.iter().chain(&neg).any(|k| k == t))
        .map(str::to_string)
        .collect();
    let mut to_traditional = BTreeMap::new();
    for line in builtin::CHAR_MAP.lines().filter(|l| !l.starts_with('#')) {
        let mut cols = line.split('\t').filter_map(|c| c.chars().next());
        if let (Some(trad), Some(simp)) = (cols.next(), cols.next()) {
            to_traditional.entry(simp).or_insert(trad);
        }
    }
    let start = NaiveDate::from_ymd_opt(cfg.start.0, cfg.start.1, 1)
        .expect("validated")
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists");
    let end = start
        .checked_add_months(Months::new(cfg.months))
        .ok_or_else(|| Error::InvalidInput("month range overflows".into()))?;

    let mut g = Generator {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        shared,
        pos,
        neg,
        topic_terms,
        search_tags: TermList::parse(builtin::SEARCH_TAGS)
            .iter()
            .map(str::to_string)
            .collect(),
        tags: TagLexicon::parse("builtin tag_lexicon", builtin::TAG_LEXICON)?,
        ads: TermList::parse(builtin::AD_KEYWORDS)
            .iter()
            .map(str::to_string)
            .collect(),
        to_traditional,
        start,
        span_secs: (end - start).num_seconds(),
    };

    let mut stances: Vec<Stance> = std::iter::repeat_n(Stance::Supporting, cfg.n_users_pos)
        .chain(std::iter::repeat_n(Stance::Opposing, cfg.n_users_neg))
        .collect();
    stances.shuffle(&mut g.rng);

    let mut corpus = SynthCorpus {
        tweets: Vec::new(),
        users: Vec::new(),
        gold: Vec::new(),
        user_stances: BTreeMap::new(),
    };
    let mut serial = 0usize;
    for (u, &stance) in stances.iter().enumerate() {
        let user_id = format!("u{u:04}");
        corpus.users.extend(g.profile(&user_id, stance));
        corpus.user_stances.insert(user_id.clone(), stance);

        let n = g
            .rng
            .gen_range(cfg.tweets_per_user.0..=cfg.tweets_per_user.1);
        for _ in 0..n {
            let text = g.text(stance);
            let mut tweet = RawTweet {
                id: format!("t{serial:06}"),
                user_id: user_id.clone(),
                text,
                created_at: g.timestamp(),
                retweet: None,
            };
            serial += 1;
            // repost an earlier root post by another user
            let earlier: Vec<usize> =
                if corpus.tweets.is_empty() || !g.rng.gen_bool(cfg.retweet_rate) {
                    Vec::new()
                } else {
                    let i = g.rng.gen_range(0..corpus.tweets.len());
                    if corpus.tweets[i].user_id != user_id {
                        vec![i]
                    } else {
                        Vec::new()
                    }
                };
            corpus.gold.push((format!("{}#0", tweet.id), stance));
            if let Some(&i) = earlier.first() {
                let mut original = corpus.tweets[i].clone();
                original.retweet = None;
                if original.created_at > tweet.created_at {
                    std::mem::swap(&mut original.created_at, &mut tweet.created_at);
                }
                corpus.gold.push((
                    format!("{}#1", tweet.id),
                    corpus.user_stances[&original.user_id],
                ));
                tweet.retweet = Some(Box::new(original));
            }
            corpus.tweets.push(tweet);
        }
    }
    Ok(corpus)
}
