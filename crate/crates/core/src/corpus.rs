//! Annotated text, specifications, and dependency-path linearization.
//!
//! All four token layers are lowercased on construction, so rule values and
//! token values compare with plain string equality.

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::matcher;
use crate::pattern::Pattern;
use crate::{Error, Result};

/// One of the four annotation layers a token constraint can test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Word,
    Lemma,
    Tag,
    Entity,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::Word, Field::Lemma, Field::Tag, Field::Entity];

    pub fn name(self) -> &'static str {
        match self {
            Field::Word => "word",
            Field::Lemma => "lemma",
            Field::Tag => "tag",
            Field::Entity => "entity",
        }
    }

    pub fn from_name(name: &str) -> Option<Field> {
        Field::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub word: String,
    pub lemma: String,
    pub tag: String,
    /// Named-entity label, `"o"` when the token is not part of an entity.
    pub entity: String,
}

impl Token {
    /// Builds a token, lowercasing every layer. Empty layers are rejected;
    /// `index` only feeds the error message.
    pub fn new(word: &str, lemma: &str, tag: &str, entity: &str, index: usize) -> Result<Token> {
        let layer = |value: &str, field: &'static str| {
            if value.is_empty() {
                Err(Error::EmptyField { field, index })
            } else {
                Ok(value.to_lowercase())
            }
        };
        Ok(Token {
            word: layer(word, "word")?,
            lemma: layer(lemma, "lemma")?,
            tag: layer(tag, "tag")?,
            entity: layer(entity, "entity")?,
        })
    }

    pub fn field(&self, field: Field) -> &str {
        match field {
            Field::Word => &self.word,
            Field::Lemma => &self.lemma,
            Field::Tag => &self.tag,
            Field::Entity => &self.entity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dependency {
    pub head: usize,
    pub dependent: usize,
    pub label: String,
}

/// A tokenized sentence with optional dependency arcs. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnnotatedSentence {
    id: String,
    tokens: Vec<Token>,
    deps: Vec<Dependency>,
}

impl AnnotatedSentence {
    pub fn new(id: impl Into<String>, tokens: Vec<Token>, deps: Vec<Dependency>) -> Result<Self> {
        let len = tokens.len();
        for dep in &deps {
            for index in [dep.head, dep.dependent] {
                if index >= len {
                    return Err(Error::DependencyOutOfRange { index, len });
                }
            }
            if dep.head == dep.dependent {
                return Err(Error::SelfLoop(dep.head));
            }
        }
        Ok(AnnotatedSentence { id: id.into(), tokens, deps })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn deps(&self) -> &[Dependency] {
        &self.deps
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Space-joined words, for display.
    pub fn text(&self) -> String {
        let words: Vec<&str> = self.tokens.iter().map(|t| t.word.as_str()).collect();
        words.join(" ")
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::TokenOutOfRange { index, len: self.len() })
        }
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for dep in &self.deps {
            adj[dep.head].push(dep.dependent);
            adj[dep.dependent].push(dep.head);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Shortest undirected dependency path from `a` to `b`, both included.
    /// Among equally short paths the lexicographically smallest index
    /// sequence wins.
    pub fn shortest_dep_path(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        self.check_index(a)?;
        self.check_index(b)?;
        if a == b {
            return Err(Error::SamePathEndpoints(a));
        }
        let adj = self.neighbours();
        // Distances to `b`; walking greedily down them from `a` and always
        // taking the smallest admissible neighbour yields the smallest path.
        let mut dist = vec![usize::MAX; self.len()];
        dist[b] = 0;
        let mut queue = VecDeque::from([b]);
        while let Some(node) = queue.pop_front() {
            for &next in &adj[node] {
                if dist[next] == usize::MAX {
                    dist[next] = dist[node] + 1;
                    queue.push_back(next);
                }
            }
        }
        if dist[a] == usize::MAX {
            return Err(Error::NoDependencyPath { from: a, to: b });
        }
        let mut path = vec![a];
        let mut node = a;
        while node != b {
            node = adj[node]
                .iter()
                .copied()
                .find(|&n| dist[n] + 1 == dist[node])
                .expect("BFS distances are consistent");
            path.push(node);
        }
        Ok(path)
    }

    /// The token inside `span` whose head lies outside it (tokens without a
    /// head count as such); the rightmost one when several qualify.
    pub fn span_head(&self, span: Span) -> Result<usize> {
        span.check(self.len())?;
        let mut head_of = vec![None; self.len()];
        for dep in &self.deps {
            head_of[dep.dependent] = Some(dep.head);
        }
        let inside = |i: usize| span.start <= i && i < span.end;
        Ok((span.start..span.end)
            .rev()
            .find(|&i| head_of[i].is_none_or(|h| !inside(h)))
            .unwrap_or(span.end - 1))
    }

    /// Keeps only the tokens on `path`, in sentence order, without arcs.
    pub fn linearize_path(&self, path: &[usize]) -> Result<AnnotatedSentence> {
        if path.is_empty() {
            return Err(Error::EmptyPath);
        }
        let mut positions = path.to_vec();
        for &p in &positions {
            self.check_index(p)?;
        }
        positions.sort_unstable();
        positions.dedup();
        let tokens = positions.iter().map(|&p| self.tokens[p].clone()).collect();
        let mut id = self.id.clone();
        id.push_str("#path");
        Ok(AnnotatedSentence { id, tokens, deps: Vec::new() })
    }

    /// Linearized shortest path between the head tokens of two spans.
    pub fn path_sentence(&self, a: Span, b: Span) -> Result<AnnotatedSentence> {
        let from = self.span_head(a)?;
        let to = self.span_head(b)?;
        let path = self.shortest_dep_path(from, to)?;
        self.linearize_path(&path)
    }
}

/// Half-open token range `[start, end)`; never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }

    pub fn check(&self, sentence_len: usize) -> Result<()> {
        if self.start < self.end && self.end <= sentence_len {
            Ok(())
        } else {
            Err(Error::InvalidSpan { start: self.start, end: self.end, len: sentence_len })
        }
    }

    /// Smallest span covering both.
    pub fn hull(&self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// One `(sentence, selections)` pair. An empty selection set is a
/// counter-example: the rule must match nothing in the sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecEntry {
    sentence: AnnotatedSentence,
    selections: Vec<Span>,
}

impl SpecEntry {
    pub fn new(sentence: AnnotatedSentence, mut selections: Vec<Span>) -> Result<SpecEntry> {
        for span in &selections {
            span.check(sentence.len())?;
        }
        selections.sort_unstable();
        selections.dedup();
        for pair in selections.windows(2) {
            if pair[0].end > pair[1].start {
                return Err(Error::OverlappingSelections(
                    pair[0].start,
                    pair[0].end,
                    pair[1].start,
                    pair[1].end,
                ));
            }
        }
        Ok(SpecEntry { sentence, selections })
    }

    pub fn sentence(&self) -> &AnnotatedSentence {
        &self.sentence
    }

    /// Selections sorted by position.
    pub fn selections(&self) -> &[Span] {
        &self.selections
    }

    pub fn is_highlighted(&self, index: usize) -> bool {
        self.selections.iter().any(|s| s.contains(index))
    }

    pub fn highlighted_count(&self) -> usize {
        self.selections.iter().map(Span::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpecMode {
    Surface,
    /// Entries are linearized shortest dependency paths.
    SimplifiedSyntax,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Specification {
    entries: Vec<SpecEntry>,
    mode: SpecMode,
}

impl Specification {
    pub fn new(entries: Vec<SpecEntry>, mode: SpecMode) -> Result<Specification> {
        if entries.is_empty() {
            return Err(Error::EmptySpecification);
        }
        Ok(Specification { entries, mode })
    }

    pub fn entries(&self) -> &[SpecEntry] {
        &self.entries
    }

    pub fn mode(&self) -> SpecMode {
        self.mode
    }
}

/// Scans `corpus` in order and returns up to `limit` `(sentence, span)` hits
/// of the leftmost-longest scanner.
pub fn query_corpus<'c>(
    corpus: &'c [AnnotatedSentence],
    pattern: &Pattern,
    limit: usize,
) -> Result<Vec<(&'c AnnotatedSentence, Span)>> {
    if !pattern.is_complete() {
        return Err(Error::IncompletePattern);
    }
    let mut hits = Vec::new();
    if limit == 0 {
        return Ok(hits);
    }
    for sentence in corpus {
        for span in matcher::scan(pattern, sentence.tokens()) {
            hits.push((sentence, span));
            if hits.len() == limit {
                return Ok(hits);
            }
        }
    }
    Ok(hits)
}

/// Convenience for tests and fixtures: a token whose four layers are given
/// as a `word/lemma/tag/entity` string.
pub fn token(spec: &str) -> Token {
    let parts: Vec<&str> = spec.split('/').collect();
    assert_eq!(parts.len(), 4, "token spec needs word/lemma/tag/entity: {spec}");
    Token::new(parts[0], parts[1], parts[2], parts[3], 0).expect("non-empty layers")
}

/// Builds a sentence from `word/lemma/tag/entity` token strings and
/// `(head, dependent)` arcs labelled `"dep"`.
pub fn sentence(id: &str, tokens: &[&str], arcs: &[(usize, usize)]) -> AnnotatedSentence {
    let deps = arcs
        .iter()
        .map(|&(head, dependent)| Dependency { head, dependent, label: "dep".to_string() })
        .collect();
    AnnotatedSentence::new(id, tokens.iter().map(|t| token(t)).collect(), deps)
        .expect("valid fixture sentence")
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::pattern::parse;

    fn bfs_all_shortest(s: &AnnotatedSentence, a: usize, b: usize) -> Vec<Vec<usize>> {
        // Enumerate every simple path, keep the shortest ones.
        fn walk(adj: &[Vec<usize>], node: usize, b: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if node == b {
                out.push(path.clone());
                return;
            }
            for &n in &adj[node] {
                if !path.contains(&n) {
                    path.push(n);
                    walk(adj, n, b, path, out);
                    path.pop();
                }
            }
        }
        let adj = s.neighbours();
        let mut all = Vec::new();
        walk(&adj, a, b, &mut vec![a], &mut all);
        let best = all.iter().map(Vec::len).min().unwrap_or(0);
        all.retain(|p| p.len() == best);
        all
    }

    #[test]
    fn lowercases_layers() {
        let t = Token::new("He", "he", "PRP", "PERSON", 0).unwrap();
        assert_eq!(t.entity, "person");
        assert_eq!(t.tag, "prp");
    }

    #[test]
    fn rejects_empty_layer() {
        assert_eq!(
            Token::new("x", "", "NN", "O", 3),
            Err(Error::EmptyField { field: "lemma", index: 3 })
        );
    }

    #[test]
    fn rejects_bad_arcs() {
        let toks = vec![token("a/a/DT/O"), token("b/b/NN/O")];
        let arc = |h, d| Dependency { head: h, dependent: d, label: "x".into() };
        assert_eq!(
            AnnotatedSentence::new("s", toks.clone(), vec![arc(2, 0)]),
            Err(Error::DependencyOutOfRange { index: 2, len: 2 })
        );
        assert_eq!(AnnotatedSentence::new("s", toks, vec![arc(1, 1)]), Err(Error::SelfLoop(1)));
    }

    #[test]
    fn anderson_path_goes_through_son() {
        let s = anderson();
        assert_eq!(s.shortest_dep_path(0, 9).unwrap(), vec![0, 3, 9]);
        let path = s.linearize_path(&[0, 3, 9]).unwrap();
        assert_eq!(path.text(), "he son anderson");
        assert_eq!(path.id(), "anderson#path");
        assert!(path.deps().is_empty());
    }

    #[test]
    fn span_heads_for_entities() {
        let s = anderson();
        assert_eq!(s.span_head(Span::new(0, 1)).unwrap(), 0);
        assert_eq!(s.span_head(Span::new(7, 10)).unwrap(), 9);
        let p = s.path_sentence(Span::new(0, 1), Span::new(7, 10)).unwrap();
        assert_eq!(p.text(), "he son anderson");
    }

    #[test]
    fn span_head_tie_prefers_rightmost() {
        // Neither token of [0,2) has a head inside the span.
        let s = sentence("t", &["a/a/X/O", "b/b/X/O", "c/c/X/O"], &[(2, 0), (2, 1)]);
        assert_eq!(s.span_head(Span::new(0, 2)).unwrap(), 1);
    }

    #[test]
    fn direct_edge_and_shortcut() {
        let s = sentence("t", &["a/a/X/O", "b/b/X/O", "c/c/X/O"], &[(0, 2), (2, 1), (1, 0)]);
        assert_eq!(s.shortest_dep_path(0, 1).unwrap(), vec![0, 1]);
        assert_eq!(s.shortest_dep_path(1, 0).unwrap(), vec![1, 0]);
    }

    #[test]
    fn tie_break_is_lexicographic() {
        // 0 - 2 - 3 and 0 - 1 - 3 are both length 2.
        let s = sentence("t", &["a/a/X/O", "b/b/X/O", "c/c/X/O", "d/d/X/O"], &[(0, 2), (2, 3), (1, 0), (3, 1)]);
        assert_eq!(s.shortest_dep_path(0, 3).unwrap(), vec![0, 1, 3]);
        let all = bfs_all_shortest(&s, 0, 3);
        assert_eq!(all.iter().min().unwrap(), &vec![0, 1, 3]);
    }

    #[test]
    fn disconnected_is_an_error() {
        let s = sentence("t", &["a/a/X/O", "b/b/X/O", "c/c/X/O"], &[(0, 1)]);
        assert_eq!(s.shortest_dep_path(0, 2), Err(Error::NoDependencyPath { from: 0, to: 2 }));
        assert_eq!(s.shortest_dep_path(1, 1), Err(Error::SamePathEndpoints(1)));
    }

    #[test]
    fn linearize_sorts_and_dedups() {
        let s = anderson();
        let a = s.linearize_path(&[9, 0, 3, 3]).unwrap();
        assert_eq!(a.text(), "he son anderson");
        assert_eq!(s.linearize_path(&[4]).unwrap().len(), 1);
        assert_eq!(s.linearize_path(&[]), Err(Error::EmptyPath));
    }

    #[test]
    fn spec_entry_rejects_overlap_and_bad_spans() {
        let s = the_dog_barked();
        assert!(SpecEntry::new(s.clone(), vec![Span::new(0, 2), Span::new(1, 3)]).is_err());
        assert!(SpecEntry::new(s.clone(), vec![Span::new(2, 4)]).is_err());
        assert!(SpecEntry::new(s.clone(), vec![Span::new(1, 1)]).is_err());
        let e = SpecEntry::new(s, vec![Span::new(2, 3), Span::new(0, 1)]).unwrap();
        assert_eq!(e.selections(), &[Span::new(0, 1), Span::new(2, 3)]);
        assert!(Specification::new(vec![], SpecMode::Surface).is_err());
    }

    #[test]
    fn query_examples() {
        let corpus = vec![anderson(), the_dog_barked()];
        let hits = query_corpus(&corpus, &parse("[word=dog]").unwrap(), 10).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0.id(), "dog");
        assert_eq!(hits[0].1, Span::new(1, 2));
        assert!(query_corpus(&corpus, &parse("[word=cat]").unwrap(), 10).unwrap().is_empty());
        assert!(query_corpus(&corpus, &parse("[]").unwrap(), 0).unwrap().is_empty());
        let limited = query_corpus(&corpus, &parse("[entity=person]").unwrap(), 2).unwrap();
        assert_eq!(limited.iter().map(|h| h.1).collect::<Vec<_>>(), vec![Span::new(0, 1), Span::new(5, 6)]);
        assert_eq!(
            query_corpus(&corpus, &parse("[word=dog] HOLE").unwrap(), 1),
            Err(Error::IncompletePattern)
        );
    }
}
