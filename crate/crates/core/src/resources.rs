//! Lexicon resources: word lists, the traditional-to-simplified character
//! map and the profile-tag stance lexicon.
//!
//! All formats are plain UTF-8 text. Lines starting with `#` are comments
//! and blank lines are ignored. Seed copies of every resource are compiled
//! into the library and exposed through [`Resources::builtin`].

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stance::Stance;

/// Ordered set of terms with exact-match lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermList {
    terms: Vec<String>,
    lookup: HashSet<String>,
}

impl TermList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a trimmed, non-empty term. Returns false if it was present
    /// or empty.
    pub fn insert(&mut self, term: &str) -> bool {
        let term = term.trim();
        if term.is_empty() || self.lookup.contains(term) {
            return false;
        }
        self.lookup.insert(term.to_string());
        self.terms.push(term.to_string());
        true
    }

    pub fn contains(&self, term: &str) -> bool {
        self.lookup.contains(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    /// Appends every term of `other` not already present.
    pub fn merge(&mut self, other: &TermList) {
        for t in other.iter() {
            self.insert(t);
        }
    }

    /// Parses one-term-per-line text.
    pub fn parse(text: &str) -> Self {
        let mut list = TermList::new();
        for line in content_lines(text) {
            list.insert(line.1);
        }
        list
    }
}

impl<'a> FromIterator<&'a str> for TermList {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut list = TermList::new();
        for t in iter {
            list.insert(t);
        }
        list
    }
}

/// Character-level traditional to simplified mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CharMap {
    pairs: HashMap<char, char>,
}

impl CharMap {
    pub fn get(&self, c: char) -> Option<char> {
        self.pairs.get(&c).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = char> + '_ {
        self.pairs.keys().copied()
    }

    pub fn values(&self) -> impl Iterator<Item = char> + '_ {
        self.pairs.values().copied()
    }

    pub fn parse(source_name: &str, text: &str) -> Result<Self> {
        let mut pairs = HashMap::new();
        for (lineno, line) in content_lines(text) {
            let (from, to) = split_tsv(source_name, lineno, line)?;
            let from = single_char(source_name, lineno, from)?;
            let to = single_char(source_name, lineno, to)?;
            if from == to {
                continue;
            }
            match pairs.insert(from, to) {
                Some(prev) if prev != to => {
                    return Err(Error::parse(
                        source_name,
                        lineno,
                        format!("`{from}` already maps to `{prev}`, cannot remap to `{to}`"),
                    ))
                }
                _ => {}
            }
        }
        Ok(CharMap { pairs })
    }
}

/// Profile tag to stance mapping. Matching is exact.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagLexicon {
    entries: Vec<(String, Stance)>,
    lookup: HashMap<String, Stance>,
}

impl TagLexicon {
    pub fn stance_of(&self, tag: &str) -> Option<Stance> {
        self.lookup.get(tag).copied()
    }

    pub fn entries(&self) -> &[(String, Stance)] {
        &self.entries
    }

    pub fn tags_for(&self, stance: Stance) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(move |(_, s)| *s == stance)
            .map(|(t, _)| t.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse(source_name: &str, text: &str) -> Result<Self> {
        let mut lex = TagLexicon::default();
        for (lineno, line) in content_lines(text) {
            let (tag, word) = split_tsv(source_name, lineno, line)?;
            let stance: Stance = word
                .parse()
                .map_err(|msg: String| Error::parse(source_name, lineno, msg))?;
            match lex.lookup.get(tag) {
                Some(&prev) if prev != stance => {
                    return Err(Error::parse(
                        source_name,
                        lineno,
                        format!("tag `{tag}` listed as both {prev} and {stance}"),
                    ))
                }
                Some(_) => {}
                None => {
                    lex.lookup.insert(tag.to_string(), stance);
                    lex.entries.push((tag.to_string(), stance));
                }
            }
        }
        Ok(lex)
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn split_tsv<'a>(source_name: &str, lineno: usize, line: &'a str) -> Result<(&'a str, &'a str)> {
    let mut cols = line.split('\t').map(str::trim);
    match (cols.next(), cols.next(), cols.next()) {
        (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => Ok((a, b)),
        _ => Err(Error::parse(
            source_name,
            lineno,
            "expected two tab-separated columns",
        )),
    }
}

fn single_char(source_name: &str, lineno: usize, cell: &str) -> Result<char> {
    let mut chars = cell.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::parse(
            source_name,
            lineno,
            format!("`{cell}` is not a single character"),
        )),
    }
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::Utf8 {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })
}

pub fn load_term_list(path: impl AsRef<Path>) -> Result<TermList> {
    Ok(TermList::parse(&read_utf8(path.as_ref())?))
}

pub fn load_tag_lexicon(path: impl AsRef<Path>) -> Result<TagLexicon> {
    let path = path.as_ref();
    TagLexicon::parse(&path.display().to_string(), &read_utf8(path)?)
}

pub fn load_char_map(path: impl AsRef<Path>) -> Result<CharMap> {
    let path = path.as_ref();
    CharMap::parse(&path.display().to_string(), &read_utf8(path)?)
}

/// Shipped seed resources, embedded at compile time.
pub mod builtin {
    pub const BASE_LEXICON: &str = include_str!("../resources/base_lexicon.txt");
    pub const CUSTOM_LEXICON: &str = include_str!("../resources/custom_lexicon.txt");
    pub const TERMINOLOGY: &str = include_str!("../resources/terminology.txt");
    pub const STOPWORDS: &str = include_str!("../resources/stopwords.txt");
    pub const AD_KEYWORDS: &str = include_str!("../resources/ad_keywords.txt");
    pub const CHAR_MAP: &str = include_str!("../resources/char_map.tsv");
    pub const TAG_LEXICON: &str = include_str!("../resources/tag_lexicon.tsv");
    pub const SEARCH_TAGS: &str = include_str!("../resources/search_tags.txt");
}

/// Paths overriding the shipped resources. `None` keeps the default.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResourcePaths {
    pub segmentation_lexicon: Option<std::path::PathBuf>,
    pub terminology_lexicon: Option<std::path::PathBuf>,
    pub stopwords: Option<std::path::PathBuf>,
    pub ad_keywords: Option<std::path::PathBuf>,
    pub char_map: Option<std::path::PathBuf>,
    pub tag_lexicon: Option<std::path::PathBuf>,
}

/// Every resource the pipeline needs, loaded and immutable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resources {
    /// Segmentation lexicon: base vocabulary merged with the custom list
    /// and the terminology list.
    pub segmentation: TermList,
    pub terminology: TermList,
    pub stopwords: TermList,
    pub ad_keywords: TermList,
    pub char_map: CharMap,
    pub tag_lexicon: TagLexicon,
}

impl Resources {
    pub fn builtin() -> Self {
        Self::load(&ResourcePaths::default()).expect("shipped resources are valid")
    }

    /// Loads resources, falling back to the shipped copy for each path not
    /// given. A custom segmentation list replaces the shipped custom list;
    /// the base vocabulary, terminology, stop words and ad keywords are
    /// always merged into the segmentation lexicon so they surface as
    /// whole tokens.
    pub fn load(paths: &ResourcePaths) -> Result<Self> {
        let list = |path: &Option<std::path::PathBuf>, default: &str| match path {
            Some(p) => load_term_list(p),
            None => Ok(TermList::parse(default)),
        };
        let terminology = list(&paths.terminology_lexicon, builtin::TERMINOLOGY)?;
        let custom = list(&paths.segmentation_lexicon, builtin::CUSTOM_LEXICON)?;
        let stopwords = list(&paths.stopwords, builtin::STOPWORDS)?;
        let ad_keywords = list(&paths.ad_keywords, builtin::AD_KEYWORDS)?;
        let mut segmentation = TermList::parse(builtin::BASE_LEXICON);
        for extra in [&custom, &terminology, &stopwords, &ad_keywords] {
            segmentation.merge(extra);
        }
        Ok(Resources {
            segmentation,
            terminology,
            stopwords,
            ad_keywords,
            char_map: match &paths.char_map {
                Some(p) => load_char_map(p)?,
                None => CharMap::parse("builtin char_map", builtin::CHAR_MAP)?,
            },
            tag_lexicon: match &paths.tag_lexicon {
                Some(p) => load_tag_lexicon(p)?,
                None => TagLexicon::parse("builtin tag_lexicon", builtin::TAG_LEXICON)?,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content).unwrap();
        f
    }

    #[test]
    fn term_list_examples() {
        let f = write_tmp("中医\n# c\n中医\n".as_bytes());
        let list = load_term_list(f.path()).unwrap();
        assert_eq!(list.iter().collect::<Vec<_>>(), vec!["中医"]);

        let f = write_tmp(b"");
        assert!(load_term_list(f.path()).unwrap().is_empty());

        let f = write_tmp("中药\n针灸\n".as_bytes());
        assert_eq!(load_term_list(f.path()).unwrap().len(), 2);
    }

    #[test]
    fn term_list_trims_and_matches_exactly() {
        let list = TermList::parse("  中医  \n\n针灸\r\n");
        assert!(list.contains("中医"));
        assert!(list.contains("针灸"));
        assert!(!list.contains(" 中医"));
        assert!(!list.contains("中"));
        let latin = TermList::parse("Sale\n");
        assert!(!latin.contains("sale"));
    }

    #[test]
    fn non_utf8_reports_offset() {
        let f = write_tmp(b"ok\n\xff\xfe");
        match load_term_list(f.path()) {
            Err(Error::Utf8 { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected utf8 error, got {other:?}"),
        }
    }

    #[test]
    fn tag_lexicon_examples() {
        let lex = TagLexicon::parse(
            "t",
            "中医爱好\tsupport\n反中医\toppose\n中医爱好\tsupport\n",
        )
        .unwrap();
        assert_eq!(lex.stance_of("中医爱好"), Some(Stance::Supporting));
        assert_eq!(lex.stance_of("反中医"), Some(Stance::Opposing));
        assert_eq!(lex.len(), 2);
    }

    #[test]
    fn tag_lexicon_errors() {
        match TagLexicon::parse("t", "中医\tsupport\n反中医\tmaybe\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(TagLexicon::parse("t", "中医\tsupport\n中医\toppose\n").is_err());
        assert!(TagLexicon::parse("t", "中医 support\n").is_err());
    }

    #[test]
    fn char_map_examples() {
        let map = CharMap::parse("m", "醫\t医\n藥\t药\n").unwrap();
        assert_eq!(map.get('醫'), Some('医'));
        assert_eq!(map.get('藥'), Some('药'));
        assert!(CharMap::parse("m", "").unwrap().is_empty());
    }

    #[test]
    fn char_map_errors() {
        assert!(CharMap::parse("m", "醫生\t医生\n").is_err());
        assert!(CharMap::parse("m", "醫\t医\n醫\t药\n").is_err());
        assert_eq!(CharMap::parse("m", "醫\t医\n醫\t医\n").unwrap().len(), 1);
        assert!(CharMap::parse("m", "医\t医\n").unwrap().is_empty());
    }

    #[test]
    fn builtin_resources_load_and_cover_seed_terms() {
        let res = Resources::builtin();
        assert_eq!(res, Resources::builtin());
        assert_eq!(res, Resources::load(&ResourcePaths::default()).unwrap());

        let search = TermList::parse(builtin::SEARCH_TAGS);
        assert_eq!(search.len(), 9);
        for tag in search.iter() {
            assert!(res.terminology.contains(tag), "{tag}");
        }
        for term in [
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
        ] {
            assert!(res.segmentation.contains(term), "{term}");
        }
        assert!(res.stopwords.contains("哦"));
        assert!(res.ad_keywords.contains("促销"));
        assert_eq!(res.tag_lexicon.tags_for(Stance::Supporting).count(), 11);
        assert_eq!(res.tag_lexicon.tags_for(Stance::Opposing).count(), 3);
        assert!(res.segmentation.iter().all(|t| t.chars().count() <= 8));
    }

    #[test]
    fn load_overrides_from_files() {
        let custom = write_tmp("新词汇\n".as_bytes());
        let stop = write_tmp("的\n".as_bytes());
        let res = Resources::load(&ResourcePaths {
            segmentation_lexicon: Some(custom.path().to_path_buf()),
            stopwords: Some(stop.path().to_path_buf()),
            ..Default::default()
        })
        .unwrap();
        assert!(res.segmentation.contains("新词汇"));
        assert!(res.segmentation.contains("中医"));
        assert_eq!(res.stopwords.len(), 1);
    }
}
