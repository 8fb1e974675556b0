//! Word vectors, averaged document vectors and cosine similarity.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::{is_stopword, Corpus};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read embeddings {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("embedding file is empty")]
    EmptyFile,
    #[error("line {line}: expected {expected} components, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no token could be resolved to a vector")]
    EmptyVector,
    #[error("property {0:?} has no piece in the embedding vocabulary")]
    UnresolvableProperty(String),
    #[error("cosine of a zero vector")]
    ZeroVector,
    #[error("vector dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
}

#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    dim: usize,
    table: HashMap<String, Vec<f32>>,
}

impl EmbeddingStore {
    /// Builds a store from in-memory vectors. All vectors must share one
    /// length.
    pub fn from_vectors<I, S>(vectors: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        let mut store = EmbeddingStore::default();
        for (i, (word, v)) in vectors.into_iter().enumerate() {
            if store.dim == 0 {
                store.dim = v.len();
            } else if v.len() != store.dim {
                return Err(EmbeddingError::Dimension { line: i + 1, expected: store.dim, found: v.len() });
            }
            store.table.entry(word.into()).or_insert(v);
        }
        if store.dim == 0 {
            return Err(EmbeddingError::EmptyFile);
        }
        Ok(store)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.table.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.table.contains_key(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }
}

/// Reads the plain-text format: one `word f1 ... fd` line per word. The
/// dimension comes from the first line. A word containing spaces is
/// accepted when its extra leading fields are not numbers. Repeated words
/// keep their first vector.
pub fn read_embeddings<R: BufRead>(reader: R, vocab_filter: Option<&HashSet<String>>) -> Result<EmbeddingStore, EmbeddingError> {
    let mut dim = 0usize;
    let mut table: HashMap<String, Vec<f32>> = HashMap::new();
    let mut seen_any = false;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| EmbeddingError::Parse { line: line_no, message: e.to_string() })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if !seen_any {
            if fields.len() < 2 {
                return Err(EmbeddingError::Dimension { line: line_no, expected: 1, found: 0 });
            }
            dim = fields.len() - 1;
            seen_any = true;
        }
        let found = fields.len() - 1;
        if found < dim {
            return Err(EmbeddingError::Dimension { line: line_no, expected: dim, found });
        }
        let split = fields.len() - dim;
        if split > 1 && fields[1..split].iter().all(|f| f.parse::<f32>().is_ok()) {
            return Err(EmbeddingError::Dimension { line: line_no, expected: dim, found });
        }
        let word = fields[..split].join(" ");
        if vocab_filter.is_some_and(|f| !f.contains(&word)) || table.contains_key(&word) {
            continue;
        }
        let values = fields[split..]
            .iter()
            .map(|f| f.parse::<f32>())
            .collect::<Result<Vec<f32>, _>>()
            .map_err(|e| EmbeddingError::Parse { line: line_no, message: e.to_string() })?;
        table.insert(word, values);
    }
    if !seen_any {
        return Err(EmbeddingError::EmptyFile);
    }
    Ok(EmbeddingStore { dim, table })
}

pub fn load_embeddings(path: impl AsRef<Path>, vocab_filter: Option<&HashSet<String>>) -> Result<EmbeddingStore, EmbeddingError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| EmbeddingError::Io { path: path.to_path_buf(), source })?;
    read_embeddings(BufReader::new(file), vocab_filter)
}

/// A dense vector. `normalized` is set only by [`DocVector::normalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    values: Vec<f64>,
    normalized: bool,
}

impl DocVector {
    pub fn new(values: Vec<f64>) -> Self {
        DocVector { values, normalized: false }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn normalized(self) -> Result<Self, EmbeddingError> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(EmbeddingError::ZeroVector);
        }
        Ok(DocVector { values: self.values.into_iter().map(|x| x / n).collect(), normalized: true })
    }
}

/// One item fed to [`average_vector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorInput<'a> {
    Word(&'a str),
    /// A CamelCase knowledge-base property, resolved through its pieces.
    Property(&'a str),
}

impl<'a> VectorInput<'a> {
    fn key(&self) -> &'a str {
        match *self {
            VectorInput::Word(w) | VectorInput::Property(w) => w,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Averaged {
    pub vector: DocVector,
    pub resolved: usize,
    /// Inputs that had no vector. Stopwords are excluded, not skipped.
    pub skipped: usize,
}

fn resolve(store: &EmbeddingStore, input: VectorInput<'_>) -> Option<Vec<f64>> {
    match input {
        VectorInput::Word(w) => store.get(w).map(|v| v.iter().map(|&x| f64::from(x)).collect()),
        VectorInput::Property(p) => property_token_vector(store, p).ok(),
    }
}

/// Mean vector of the non-stopword inputs found in `store`.
///
/// With `weights`, each distinct input contributes once with its weight and
/// the sum is divided by the total weight; inputs without a weight count as
/// zero.
pub fn average_vector<'a, I>(
    store: &EmbeddingStore,
    inputs: I,
    weights: Option<&HashMap<String, f64>>,
) -> Result<Averaged, EmbeddingError>
where
    I: IntoIterator<Item = VectorInput<'a>>,
{
    let mut sum = vec![0.0f64; store.dim()];
    let mut total = 0.0f64;
    let mut resolved = 0usize;
    let mut skipped = 0usize;
    let mut seen: HashSet<VectorInput<'a>> = HashSet::new();
    for input in inputs {
        if let VectorInput::Word(w) = input {
            if is_stopword(w) {
                continue;
            }
        }
        let weight = match weights {
            Some(ws) => {
                if !seen.insert(input) {
                    continue;
                }
                ws.get(input.key()).copied().unwrap_or(0.0)
            }
            None => 1.0,
        };
        match resolve(store, input) {
            Some(v) => {
                resolved += 1;
                if weight != 0.0 {
                    for (s, x) in sum.iter_mut().zip(&v) {
                        *s += weight * x;
                    }
                    total += weight;
                }
            }
            None => skipped += 1,
        }
    }
    if resolved == 0 || total == 0.0 {
        return Err(EmbeddingError::EmptyVector);
    }
    sum.iter_mut().for_each(|s| *s /= total);
    Ok(Averaged { vector: DocVector::new(sum), resolved, skipped })
}

impl std::hash::Hash for VectorInput<'_> {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        self.key().hash(state);
    }
}

/// Splits a CamelCase name into lowercase pieces: "PersonalProduct" gives
/// ["personal", "product"], "USBCable" gives ["usb", "cable"].
pub fn split_camel_case(name: &str) -> Vec<String> {
    let chars: Vec<char> = name.chars().collect();
    let mut pieces = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            if !current.is_empty() {
                pieces.push(std::mem::take(&mut current));
            }
            continue;
        }
        if !current.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            let boundary = (c.is_uppercase() && (prev.is_lowercase() || prev.is_numeric()))
                || (c.is_uppercase() && prev.is_uppercase() && next_lower)
                || (c.is_numeric() != prev.is_numeric() && prev.is_alphanumeric());
            if boundary {
                pieces.push(std::mem::take(&mut current));
            }
        }
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        pieces.push(current);
    }
    pieces
}

/// Mean of the in-vocabulary pieces of a property name.
pub fn property_token_vector(store: &EmbeddingStore, property: &str) -> Result<Vec<f64>, EmbeddingError> {
    let mut sum = vec![0.0f64; store.dim()];
    let mut n = 0usize;
    for piece in split_camel_case(property) {
        if let Some(v) = store.get(&piece) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += f64::from(x);
            }
            n += 1;
        }
    }
    if n == 0 {
        return Err(EmbeddingError::UnresolvableProperty(property.to_string()));
    }
    Ok(sum.into_iter().map(|s| s / n as f64).collect())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity of two raw slices, clamped to [-1, 1].
pub fn cosine_slices(a: &[f64], b: &[f64]) -> Result<f64, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::DimMismatch(a.len(), b.len()));
    }
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

pub fn cosine(a: &DocVector, b: &DocVector) -> Result<f64, EmbeddingError> {
    if a.is_normalized() && b.is_normalized() && a.dim() == b.dim() {
        return Ok(dot(a.values(), b.values()).clamp(-1.0, 1.0));
    }
    cosine_slices(a.values(), b.values())
}

/// TF-IDF weights per document: `tf(w, d) * ln(N / df(w))`.
pub fn tfidf_weights<D, W>(docs: &[D]) -> Vec<HashMap<String, f64>>
where
    D: AsRef<[W]>,
    W: AsRef<str>,
{
    let n = docs.len() as f64;
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let distinct: HashSet<&str> = doc.as_ref().iter().map(AsRef::as_ref).collect();
        for w in distinct {
            *df.entry(w).or_default() += 1;
        }
    }
    docs.iter()
        .map(|doc| {
            let mut tf: HashMap<&str, usize> = HashMap::new();
            for w in doc.as_ref() {
                *tf.entry(w.as_ref()).or_default() += 1;
            }
            tf.into_iter()
                .map(|(w, count)| (w.to_string(), count as f64 * (n / df[w] as f64).ln()))
                .collect()
        })
        .collect()
}

/// TF-IDF weights over the non-stopword lemmas of each document, keyed by
/// document id.
pub fn corpus_tfidf_weights(corpus: &Corpus) -> HashMap<String, HashMap<String, f64>> {
    let docs: Vec<Vec<&str>> = corpus.iter().map(|d| d.content_lemmas().collect()).collect();
    corpus
        .iter()
        .map(|d| d.id.clone())
        .zip(tfidf_weights(&docs))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn store(pairs: &[(&str, &[f32])]) -> EmbeddingStore {
        EmbeddingStore::from_vectors(pairs.iter().map(|(w, v)| (*w, v.to_vec()))).unwrap()
    }

    #[test]
    fn reads_text_format() {
        let src = "soap 1 0 0 0\nknife 0 1 0 0\nphone 0 0 1 0\n";
        let s = read_embeddings(src.as_bytes(), None).unwrap();
        assert_eq!((s.dim(), s.len()), (4, 3));
        let filter: HashSet<String> = ["soap".to_string(), "dog".to_string()].into();
        let s = read_embeddings(src.as_bytes(), Some(&filter)).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.contains("soap"));
    }

    #[test]
    fn dimension_errors_name_the_line() {
        let err = read_embeddings("a 1 2 3\nb 1 2\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, EmbeddingError::Dimension { line: 2, expected: 3, found: 2 }));
        let err = read_embeddings("a 1 2\nb 1 2 3\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, EmbeddingError::Dimension { line: 2, expected: 2, found: 3 }));
        assert!(matches!(read_embeddings("".as_bytes(), None), Err(EmbeddingError::EmptyFile)));
        assert!(matches!(read_embeddings("a 1 x\n".as_bytes(), None), Err(EmbeddingError::Parse { line: 1, .. })));
    }

    #[test]
    fn multiword_entries() {
        let s = read_embeddings("a 1 2\n. . . 3 4\n".as_bytes(), None).unwrap();
        assert_eq!(s.get(". . ."), Some(&[3.0f32, 4.0][..]));
    }

    #[test]
    fn averages() {
        let s = store(&[("soap", &[1.0, 0.0]), ("knife", &[0.0, 1.0])]);
        let avg = average_vector(&s, [VectorInput::Word("soap"), VectorInput::Word("knife")], None).unwrap();
        assert_eq!(avg.vector.values(), &[0.5, 0.5]);
        let single = average_vector(&s, [VectorInput::Word("soap"), VectorInput::Word("the"), VectorInput::Word("zz")], None).unwrap();
        assert_eq!(single.vector.values(), &[1.0, 0.0]);
        assert_eq!((single.resolved, single.skipped), (1, 1));
        assert!(matches!(
            average_vector(&s, [VectorInput::Word("zz"), VectorInput::Word("of")], None),
            Err(EmbeddingError::EmptyVector)
        ));
    }

    #[test]
    fn weighted_average_counts_distinct_inputs() {
        let s = store(&[("soap", &[1.0, 0.0]), ("knife", &[0.0, 1.0])]);
        let w: HashMap<String, f64> = [("soap".to_string(), 3.0), ("knife".to_string(), 1.0)].into();
        let inputs = [VectorInput::Word("soap"), VectorInput::Word("knife"), VectorInput::Word("soap")];
        let avg = average_vector(&s, inputs, Some(&w)).unwrap();
        assert_eq!(avg.vector.values(), &[0.75, 0.25]);
    }

    #[test]
    fn property_vectors() {
        let s = store(&[("personal", &[1.0, 0.0]), ("product", &[0.0, 1.0]), ("water", &[2.0, 2.0])]);
        assert_eq!(property_token_vector(&s, "PersonalProduct").unwrap(), vec![0.5, 0.5]);
        assert_eq!(property_token_vector(&s, "Water").unwrap(), vec![2.0, 2.0]);
        assert!(matches!(property_token_vector(&s, "QqZz"), Err(EmbeddingError::UnresolvableProperty(_))));
        let avg = average_vector(&s, [VectorInput::Property("PersonalProduct"), VectorInput::Word("water")], None).unwrap();
        assert_eq!(avg.vector.values(), &[1.25, 1.25]);
    }

    #[test]
    fn camel_case_pieces() {
        assert_eq!(split_camel_case("PersonalProduct"), ["personal", "product"]);
        assert_eq!(split_camel_case("USBCable"), ["usb", "cable"]);
        assert_eq!(split_camel_case("Water"), ["water"]);
        assert_eq!(split_camel_case("Level3Thing"), ["level", "3", "thing"]);
        assert_eq!(split_camel_case("Bar-Shaped"), ["bar", "shaped"]);
    }

    #[test]
    fn cosine_values() {
        let v = DocVector::new(vec![1.0, 2.0]);
        assert_abs_diff_eq!(cosine(&v, &v).unwrap(), 1.0, epsilon = 1e-12);
        let x = DocVector::new(vec![1.0, 0.0]);
        let y = DocVector::new(vec![0.0, 3.0]);
        assert_eq!(cosine(&x, &y).unwrap(), 0.0);
        let d = DocVector::new(vec![1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]);
        assert_abs_diff_eq!(cosine(&d, &x).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-8);
        assert!(matches!(cosine(&x, &DocVector::new(vec![0.0, 0.0])), Err(EmbeddingError::ZeroVector)));
        assert!(matches!(cosine(&x, &DocVector::new(vec![1.0])), Err(EmbeddingError::DimMismatch(2, 1))));
        assert!(DocVector::new(vec![0.0, 0.0]).normalized().is_err());
    }

    fn brute_tfidf(docs: &[Vec<&str>], d: usize, w: &str) -> f64 {
        let tf = docs[d].iter().filter(|x| **x == w).count() as f64;
        let df = docs.iter().filter(|doc| doc.contains(&w)).count() as f64;
        tf * (docs.len() as f64 / df).ln()
    }

    #[test]
    fn tfidf_matches_brute_force() {
        let docs = vec![vec!["soap", "dish", "soap"], vec!["knife", "dish"], vec!["phone", "dish", "knife"]];
        let weights = tfidf_weights(&docs);
        for (d, doc) in docs.iter().enumerate() {
            for w in doc {
                assert_abs_diff_eq!(weights[d][*w], brute_tfidf(&docs, d, w), epsilon = 1e-12);
            }
        }
        assert_eq!(weights[0]["dish"], 0.0);
        assert_abs_diff_eq!(weights[2]["phone"], 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(weights[0]["soap"], 2.0 * 3f64.ln(), epsilon = 1e-12);
    }

    fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, 5)
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric_and_scale_invariant(a in vec_strategy(), b in vec_strategy(), k in 0.01f64..100.0) {
            prop_assume!(dot(&a, &a) > 1e-6 && dot(&b, &b) > 1e-6);
            let (va, vb) = (DocVector::new(a.clone()), DocVector::new(b));
            let ab = cosine(&va, &vb).unwrap();
            prop_assert!((ab - cosine(&vb, &va).unwrap()).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
            let ka = DocVector::new(a.iter().map(|x| x * k).collect());
            prop_assert!((cosine(&ka, &vb).unwrap() - ab).abs() < 1e-9);
        }

        #[test]
        fn normalized_cosine_ranks_like_euclidean(q in vec_strategy(), docs in proptest::collection::vec(vec_strategy(), 2..8)) {
            prop_assume!(dot(&q, &q) > 1e-6 && docs.iter().all(|d| dot(d, d) > 1e-6));
            let qn = DocVector::new(q).normalized().unwrap();
            let normed: Vec<DocVector> = docs.into_iter().map(|d| DocVector::new(d).normalized().unwrap()).collect();
            for a in &normed {
                prop_assert!((a.norm() - 1.0).abs() < 1e-9);
                for b in &normed {
                    let (ca, cb) = (cosine(&qn, a).unwrap(), cosine(&qn, b).unwrap());
                    let dist = |v: &DocVector| v.values().iter().zip(qn.values()).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
                    if ca > cb + 1e-9 {
                        prop_assert!(dist(a) < dist(b));
                    }
                }
            }
        }

        #[test]
        fn average_is_permutation_invariant(idx in proptest::collection::vec(0usize..4, 1..10), seed in any::<u64>()) {
            let s = store(&[("soap", &[1.0, 0.0, 2.0]), ("knife", &[0.0, 1.0, -1.0]), ("phone", &[3.0, 3.0, 0.5]), ("dog", &[-1.0, 0.5, 0.0])]);
            let words = ["soap", "knife", "phone", "dog"];
            let inputs: Vec<VectorInput> = idx.iter().map(|&i| VectorInput::Word(words[i])).collect();
            let mut shuffled = inputs.clone();
            let n = shuffled.len();
            for i in 0..n {
                let j = ((seed >> (i % 60)) as usize + i * 7) % n;
                shuffled.swap(i, j);
            }
            let a = average_vector(&s, inputs, None).unwrap();
            let b = average_vector(&s, shuffled, None).unwrap();
            for (x, y) in a.vector.values().iter().zip(b.vector.values()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
