//! Composition of ingestion, preprocessing and labeling.

use crate::corpus::{dedupe_users, split_retweets, RawTweet, UserProfile};
use crate::preprocess::{preprocess_tweet, Document};
use crate::resources::Resources;
use crate::supervision::{filter_topic, label_corpus, LabeledDataset};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrepStats {
    pub raw_records: usize,
    pub rejected_records: usize,
    pub flattened: usize,
    /// Advertisements and posts with no tokens left.
    pub dropped: usize,
    pub documents: usize,
}

/// Flattens retweet chains and preprocesses every post, keeping input order.
pub fn prepare(raws: &[RawTweet], res: &Resources) -> (Vec<Document>, PrepStats) {
    let split = split_retweets(raws);
    let docs: Vec<Document> = split
        .tweets
        .iter()
        .filter_map(|t| preprocess_tweet(t, res))
        .collect();
    let stats = PrepStats {
        raw_records: raws.len(),
        rejected_records: split.rejected,
        flattened: split.tweets.len(),
        dropped: split.tweets.len() - docs.len(),
        documents: docs.len(),
    };
    (docs, stats)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelStats {
    pub input: usize,
    pub off_topic: usize,
    pub unlabeled: usize,
    pub labeled: usize,
    pub labeled_users: usize,
}

/// Keeps on-topic documents and labels them by author stance. Returns the
/// labeled dataset and the on-topic documents whose author has no stance.
pub fn label_documents(
    docs: Vec<Document>,
    users: &[UserProfile],
    res: &Resources,
) -> (LabeledDataset, Vec<Document>, LabelStats) {
    let input = docs.len();
    let on_topic = filter_topic(docs, &res.terminology);
    let off_topic = input - on_topic.len();
    let (dataset, remainder) = label_corpus(on_topic, &dedupe_users(users), &res.tag_lexicon);
    let stats = LabelStats {
        input,
        off_topic,
        unlabeled: remainder.len(),
        labeled: dataset.documents.len(),
        labeled_users: dataset.users.len(),
    };
    (dataset, remainder, stats)
}

/// Raw corpus straight to a labeled dataset.
pub fn build_dataset(raws: &[RawTweet], users: &[UserProfile], res: &Resources) -> LabeledDataset {
    let (docs, _) = prepare(raws, res);
    label_documents(docs, users, res).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::timestamp;
    use crate::stance::Stance;

    fn raw(id: &str, user: &str, text: &str) -> RawTweet {
        RawTweet {
            id: id.into(),
            user_id: user.into(),
            text: text.into(),
            created_at: timestamp::parse("2013-11-02T08:00:00").unwrap(),
            retweet: None,
        }
    }

    #[test]
    fn composes_stages() {
        let res = Resources::builtin();
        let raws = vec![
            raw("1", "a", "中医 针灸 养生 很好"),
            raw("2", "b", "中药 毒性 马兜铃酸 中医"),
            raw("3", "a", "今天天气"),
            raw("4", "c", "中医 针灸"),
            raw("5", "a", "促销 中医 针灸"),
        ];
        let users = vec![
            UserProfile {
                user_id: "a".into(),
                tags: vec!["中医爱好".into()],
            },
            UserProfile {
                user_id: "b".into(),
                tags: vec!["反中医".into()],
            },
        ];
        let (docs, prep) = prepare(&raws, &res);
        assert_eq!(prep.flattened, 5);
        assert_eq!(prep.dropped, 1);
        let (ds, rest, stats) = label_documents(docs, &users, &res);
        assert_eq!(stats.off_topic, 1);
        assert_eq!(rest.len(), 1);
        assert_eq!(ds.labels(), [Stance::Supporting, Stance::Opposing]);
        assert_eq!(stats.labeled_users, 2);
    }
}
