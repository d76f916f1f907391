//! Text normalization, tokenization, stopword filtering and language detection.
//!
//! The same [`Analyzer`] is shared by the ontology lexicon, the service index and
//! the query pipeline so that every surface form lands on identical keys.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;

const TATWEEL: char = '\u{0640}';
const ALEF: char = '\u{0627}';
const YA: char = '\u{064A}';

const FR_STOPWORDS: &[&str] = &[
    "a", "à", "au", "aux", "avec", "ce", "ces", "cet", "cette", "comment", "d", "dans", "de",
    "des", "du", "elle", "elles", "en", "est", "et", "être", "il", "ils", "je", "l", "la", "le",
    "les", "leur", "leurs", "ma", "mes", "mon", "ne", "nous", "ou", "où", "par", "pas", "pour",
    "qu", "que", "quel", "quelle", "quelles", "quels", "qui", "sa", "sans", "se", "ses", "son",
    "sont", "sur", "un", "une", "vous", "y",
];

const EN_STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "can", "do", "does", "for", "from", "how",
    "i", "in", "is", "it", "its", "my", "of", "on", "or", "that", "the", "these", "this",
    "those", "to", "what", "which", "who", "with", "without", "your",
];

const AR_STOPWORDS: &[&str] = &[
    "في", "من", "إلى", "على", "عن", "مع", "هذا", "هذه", "ذلك", "تلك", "التي", "الذي", "الذين",
    "و", "أو", "ثم", "كيف", "ما", "ماذا", "هل", "أن", "إن", "لا", "كل", "بعض", "عند", "أي",
];

/// Applies the per-language normalization: NFKC, lowercase, then the French
/// diacritic strip or the Arabic orthographic folding.
pub fn normalize(text: &str, language: LanguageCode) -> String {
    let folded: String = text.nfkc().collect::<String>().to_lowercase();
    match language {
        LanguageCode::FR => folded.nfd().filter(|c| !is_combining_mark(*c)).nfc().collect(),
        LanguageCode::AR => folded
            .chars()
            .filter(|&c| c != TATWEEL && !is_haraka(c))
            .map(|c| match c {
                '\u{0622}' | '\u{0623}' | '\u{0625}' => ALEF,
                '\u{0649}' => YA,
                other => other,
            })
            .collect(),
        _ => folded,
    }
}

fn is_haraka(c: char) -> bool {
    ('\u{064B}'..='\u{0652}').contains(&c)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

/// Arabic, Arabic Supplement, Arabic Extended-A and the presentation-form blocks.
pub fn is_arabic_script(c: char) -> bool {
    matches!(c,
        '\u{0600}'..='\u{06FF}'
        | '\u{0750}'..='\u{077F}'
        | '\u{08A0}'..='\u{08FF}'
        | '\u{FB50}'..='\u{FDFF}'
        | '\u{FE70}'..='\u{FEFF}')
}

/// Normalizes then splits on every character that is not a letter, digit or
/// combining mark. Hyphenated compounds come out as their parts.
pub fn tokenize(text: &str, language: LanguageCode) -> Vec<String> {
    normalize(text, language)
        .split(|c: char| !is_word_char(c))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Tokenizer plus stopword lists and the fallback language for detection.
#[derive(Debug, Clone, PartialEq)]
pub struct Analyzer {
    default_language: LanguageCode,
    stopwords: BTreeMap<LanguageCode, BTreeSet<String>>,
}

impl Default for Analyzer {
    fn default() -> Self {
        Self::new(LanguageCode::FR)
    }
}

impl Analyzer {
    /// Analyzer with the bundled fr/ar/en stopword lists.
    pub fn new(default_language: LanguageCode) -> Self {
        let mut analyzer = Analyzer {
            default_language,
            stopwords: BTreeMap::new(),
        };
        analyzer.set_stopwords(LanguageCode::FR, FR_STOPWORDS.iter().copied());
        analyzer.set_stopwords(LanguageCode::EN, EN_STOPWORDS.iter().copied());
        analyzer.set_stopwords(LanguageCode::AR, AR_STOPWORDS.iter().copied());
        analyzer
    }

    /// Analyzer without any stopwords.
    pub fn without_stopwords(default_language: LanguageCode) -> Self {
        Analyzer {
            default_language,
            stopwords: BTreeMap::new(),
        }
    }

    pub fn default_language(&self) -> LanguageCode {
        self.default_language
    }

    /// Replaces the stopword list of `language`. Entries are normalized the
    /// same way as text, so `"à"` and `"a"` are the same French stopword.
    pub fn set_stopwords<'a>(
        &mut self,
        language: LanguageCode,
        words: impl IntoIterator<Item = &'a str>,
    ) {
        let list = words
            .into_iter()
            .flat_map(|w| tokenize(w, language))
            .collect();
        self.stopwords.insert(language, list);
    }

    /// Loads a stopword override file: UTF-8, one entry per line, `#` comments.
    pub fn load_stopwords_file(&mut self, language: LanguageCode, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        let words: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        self.set_stopwords(language, words);
        Ok(())
    }

    pub fn stopwords(&self) -> &BTreeMap<LanguageCode, BTreeSet<String>> {
        &self.stopwords
    }

    pub fn is_stopword(&self, token: &str, language: LanguageCode) -> bool {
        self.stopwords
            .get(&language)
            .is_some_and(|set| set.contains(token))
    }

    pub fn tokenize(&self, text: &str, language: LanguageCode) -> Vec<String> {
        tokenize(text, language)
    }

    /// Drops stopwords, keeping order and duplicates of the survivors.
    pub fn filter(&self, tokens: &[String], language: LanguageCode) -> Vec<String> {
        tokens
            .iter()
            .filter(|t| !self.is_stopword(t, language))
            .cloned()
            .collect()
    }

    /// Token sequence under which a lemma or variant form is stored in the
    /// lexicon: the stopword-filtered tokens, or the raw tokens when the form
    /// consists of stopwords only.
    pub fn form_key(&self, form: &str, language: LanguageCode) -> Vec<String> {
        let tokens = self.tokenize(form, language);
        let filtered = self.filter(&tokens, language);
        if filtered.is_empty() {
            tokens
        } else {
            filtered
        }
    }

    /// `ar` when at least half of the letters are Arabic script, otherwise the
    /// default language.
    pub fn detect_language(&self, text: &str) -> Result<LanguageCode> {
        let text = text.trim();
        if text.is_empty() {
            return Err(CoreError::EmptyQuery);
        }
        let (letters, arabic) = text
            .chars()
            .filter(|c| c.is_alphabetic())
            .fold((0usize, 0usize), |(l, a), c| {
                (l + 1, a + usize::from(is_arabic_script(c)))
            });
        if letters > 0 && arabic * 2 >= letters {
            Ok(LanguageCode::AR)
        } else {
            Ok(self.default_language)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn hyphenated_compound_splits() {
        assert_eq!(
            tokenize("Duty-Free shopping", LanguageCode::EN),
            toks(&["duty", "free", "shopping"])
        );
        assert!(tokenize("", LanguageCode::EN).is_empty());
        assert!(tokenize(" -- ,. ", LanguageCode::FR).is_empty());
    }

    #[test]
    fn french_diacritics_are_stripped() {
        assert_eq!(tokenize("Éléphant", LanguageCode::FR), toks(&["elephant"]));
        assert_eq!(
            tokenize("Dédouanement des marchandises", LanguageCode::FR),
            toks(&["dedouanement", "des", "marchandises"])
        );
        assert_eq!(tokenize("l'État", LanguageCode::FR), toks(&["l", "etat"]));
    }

    #[test]
    fn english_keeps_precomposed_letters() {
        assert_eq!(tokenize("Café", LanguageCode::EN), toks(&["café"]));
    }

    #[test]
    fn nfkc_folds_compatibility_forms() {
        assert_eq!(tokenize("ﬁnance", LanguageCode::EN), toks(&["finance"]));
        assert_eq!(tokenize("ＶＩＳＡ", LanguageCode::EN), toks(&["visa"]));
    }

    #[test]
    fn arabic_folding() {
        // tatweel, harakat, hamza-alef and alef maqsura
        assert_eq!(normalize("جـمـارك", LanguageCode::AR), "جمارك");
        assert_eq!(normalize("تَأْشِيرَة", LanguageCode::AR), "تاشيرة");
        assert_eq!(normalize("إعفاء", LanguageCode::AR), "اعفاء");
        assert_eq!(normalize("آلة", LanguageCode::AR), "الة");
        assert_eq!(normalize("مستشفى", LanguageCode::AR), "مستشفي");
        // ta marbuta is left alone
        assert_eq!(normalize("تأشيرة", LanguageCode::AR), "تاشيرة");
    }

    #[test]
    fn filter_drops_stopwords_in_order() {
        let a = Analyzer::new(LanguageCode::FR);
        let tokens = toks(&["admission", "en", "franchise"]);
        let filtered = a.filter(&tokens, LanguageCode::FR);
        assert_eq!(filtered, toks(&["admission", "franchise"]));
        assert_eq!(a.filter(&filtered, LanguageCode::FR), filtered);
        assert!(a.filter(&[], LanguageCode::FR).is_empty());
        // duplicates of survivors are kept
        assert_eq!(
            a.filter(&toks(&["visa", "de", "visa"]), LanguageCode::FR),
            toks(&["visa", "visa"])
        );
    }

    #[test]
    fn stopword_lists_are_normalized() {
        let a = Analyzer::new(LanguageCode::FR);
        assert!(a.is_stopword("a", LanguageCode::FR)); // from "à"
        assert!(a.is_stopword("etre", LanguageCode::FR));
        assert!(a.is_stopword("الي", LanguageCode::AR)); // from "إلى"
    }

    #[test]
    fn form_key_falls_back_to_raw_tokens() {
        let a = Analyzer::new(LanguageCode::FR);
        assert_eq!(
            a.form_key("Franchise de droits", LanguageCode::FR),
            toks(&["franchise", "droits"])
        );
        assert_eq!(a.form_key("de la", LanguageCode::FR), toks(&["de", "la"]));
    }

    #[test]
    fn detects_arabic_by_majority() {
        let a = Analyzer::new(LanguageCode::FR);
        assert_eq!(a.detect_language("تأشيرة").unwrap(), LanguageCode::AR);
        assert_eq!(a.detect_language("passeport").unwrap(), LanguageCode::FR);
        assert_eq!(a.detect_language("visa تأشيرة").unwrap(), LanguageCode::AR);
        assert_eq!(a.detect_language("123").unwrap(), LanguageCode::FR);
        assert!(matches!(a.detect_language(""), Err(CoreError::EmptyQuery)));
        assert!(matches!(a.detect_language("   "), Err(CoreError::EmptyQuery)));
        let en = Analyzer::new(LanguageCode::EN);
        assert_eq!(en.detect_language("passport").unwrap(), LanguageCode::EN);
    }

    #[test]
    fn stopword_file_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fr.txt");
        fs::write(&path, "# custom\nvisa\n\n  Demande \n").unwrap();
        let mut a = Analyzer::new(LanguageCode::FR);
        a.load_stopwords_file(LanguageCode::FR, &path).unwrap();
        assert!(a.is_stopword("visa", LanguageCode::FR));
        assert!(a.is_stopword("demande", LanguageCode::FR));
        assert!(!a.is_stopword("de", LanguageCode::FR));
    }
}
