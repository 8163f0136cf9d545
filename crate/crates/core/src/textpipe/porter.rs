//! Porter suffix-stripping stemmer (the classic 1980 algorithm).
//!
//! Words of length one or two are returned unchanged, matching the
//! reference implementation. Non-letter characters are treated as
//! consonants, so tokens containing digits pass through mostly intact.

/// Stem a single lowercase token.
pub fn stem_word(word: &str) -> String {
    let mut w: Vec<char> = word.chars().collect();
    if w.len() <= 2 {
        return word.to_owned();
    }
    step_1a(&mut w);
    step_1b(&mut w);
    step_1c(&mut w);
    step_2(&mut w);
    step_3(&mut w);
    step_4(&mut w);
    step_5a(&mut w);
    step_5b(&mut w);
    w.into_iter().collect()
}

fn is_consonant(w: &[char], i: usize) -> bool {
    match w[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => false,
        'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// The measure m of a stem: the number of vowel-consonant sequences.
fn measure(w: &[char]) -> usize {
    let n = w.len();
    let mut i = 0;
    let mut m = 0;
    while i < n && is_consonant(w, i) {
        i += 1;
    }
    while i < n {
        while i < n && !is_consonant(w, i) {
            i += 1;
        }
        if i == n {
            break;
        }
        m += 1;
        while i < n && is_consonant(w, i) {
            i += 1;
        }
    }
    m
}

fn has_vowel(w: &[char]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[char]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// *o: the stem ends consonant-vowel-consonant and the final consonant is
/// not w, x or y.
fn ends_cvc(w: &[char]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], 'w' | 'x' | 'y')
}

fn ends_with(w: &[char], suffix: &str) -> bool {
    let n = w.len();
    let k = suffix.chars().count();
    n >= k && suffix.chars().zip(&w[n - k..]).all(|(a, &b)| a == b)
}

fn step_1a(w: &mut Vec<char>) {
    if ends_with(w, "sses") || ends_with(w, "ies") {
        w.truncate(w.len() - 2);
    } else if !ends_with(w, "ss") && ends_with(w, "s") {
        w.pop();
    }
}

fn step_1b(w: &mut Vec<char>) {
    if ends_with(w, "eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            w.pop();
        }
    } else if ends_with(w, "ed") && has_vowel(&w[..w.len() - 2]) {
        w.truncate(w.len() - 2);
        step_1b_cleanup(w);
    } else if ends_with(w, "ing") && has_vowel(&w[..w.len() - 3]) {
        w.truncate(w.len() - 3);
        step_1b_cleanup(w);
    }
}

fn step_1b_cleanup(w: &mut Vec<char>) {
    if ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz") {
        w.push('e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], 'l' | 's' | 'z') {
        w.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push('e');
    }
}

fn step_1c(w: &mut [char]) {
    let n = w.len();
    if ends_with(w, "y") && has_vowel(&w[..n - 1]) {
        w[n - 1] = 'i';
    }
}

// Ordered so that when two suffixes can both match, the longer one comes
// first; the first matching suffix consumes the step whether or not its
// measure condition holds.
const STEP2_RULES: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
];

const STEP3_RULES: &[(&str, &str)] = &[
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
];

fn apply_rules(w: &mut Vec<char>, rules: &[(&str, &str)]) {
    for (suffix, replacement) in rules {
        if ends_with(w, suffix) {
            let stem_len = w.len() - suffix.chars().count();
            if measure(&w[..stem_len]) > 0 {
                w.truncate(stem_len);
                w.extend(replacement.chars());
            }
            return;
        }
    }
}

fn step_2(w: &mut Vec<char>) {
    apply_rules(w, STEP2_RULES);
}

fn step_3(w: &mut Vec<char>) {
    apply_rules(w, STEP3_RULES);
}

const STEP4_SUFFIXES: &[&str] = &[
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion", "ou",
    "ism", "ate", "iti", "ous", "ive", "ize",
];

fn step_4(w: &mut Vec<char>) {
    for suffix in STEP4_SUFFIXES {
        if ends_with(w, suffix) {
            let stem_len = w.len() - suffix.chars().count();
            // "ion" only strips when the stem ends in s or t.
            let ion_ok = *suffix != "ion" || (stem_len > 0 && matches!(w[stem_len - 1], 's' | 't'));
            if ion_ok && measure(&w[..stem_len]) > 1 {
                w.truncate(stem_len);
            }
            return;
        }
    }
}

fn step_5a(w: &mut Vec<char>) {
    if ends_with(w, "e") {
        let stem = &w[..w.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            w.pop();
        }
    }
}

fn step_5b(w: &mut Vec<char>) {
    if ends_with(w, "l") && ends_double_consonant(w) && measure(w) > 1 {
        w.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Pairs fixed from the reference implementation of the published
    // algorithm, covering every step.
    const REFERENCE_PAIRS: &[(&str, &str)] = &[
        // step 1a
        ("caresses", "caress"),
        ("ponies", "poni"),
        ("ties", "ti"),
        ("caress", "caress"),
        ("cats", "cat"),
        // step 1b
        ("feed", "feed"),
        ("agreed", "agre"),
        ("plastered", "plaster"),
        ("bled", "bled"),
        ("motoring", "motor"),
        ("sing", "sing"),
        ("conflated", "conflat"),
        ("troubled", "troubl"),
        ("sized", "size"),
        ("hopping", "hop"),
        ("tanned", "tan"),
        ("falling", "fall"),
        ("hissing", "hiss"),
        ("fizzed", "fizz"),
        ("failing", "fail"),
        ("filing", "file"),
        // step 1c
        ("happy", "happi"),
        ("sky", "sky"),
        ("flying", "fly"),
        // step 2
        ("relational", "relat"),
        ("conditional", "condit"),
        ("rational", "ration"),
        ("valenci", "valenc"),
        ("hesitanci", "hesit"),
        ("digitizer", "digit"),
        ("conformabli", "conform"),
        ("radically", "radic"),
        ("differentli", "differ"),
        ("vileli", "vile"),
        ("analogousli", "analog"),
        ("vietnamization", "vietnam"),
        ("predication", "predic"),
        ("operator", "oper"),
        ("feudalism", "feudal"),
        ("decisiveness", "decis"),
        ("hopefulness", "hope"),
        ("callousness", "callous"),
        ("formaliti", "formal"),
        ("sensitiviti", "sensit"),
        ("sensibiliti", "sensibl"),
        // step 3
        ("triplicate", "triplic"),
        ("formative", "form"),
        ("formalize", "formal"),
        ("electricity", "electr"),
        ("electrical", "electr"),
        ("hopeful", "hope"),
        ("goodness", "good"),
        // step 4
        ("revival", "reviv"),
        ("allowance", "allow"),
        ("inference", "infer"),
        ("airliner", "airlin"),
        ("gyroscopic", "gyroscop"),
        ("adjustable", "adjust"),
        ("defensible", "defens"),
        ("irritant", "irrit"),
        ("replacement", "replac"),
        ("adjustment", "adjust"),
        ("dependent", "depend"),
        ("adoption", "adopt"),
        ("opinion", "opinion"),
        ("communism", "commun"),
        ("activate", "activ"),
        ("angulariti", "angular"),
        ("homologous", "homolog"),
        ("effective", "effect"),
        ("bowdlerize", "bowdler"),
        // step 5
        ("probate", "probat"),
        ("rate", "rate"),
        ("cease", "ceas"),
        ("controll", "control"),
        ("roll", "roll"),
        // chains
        ("generalizations", "gener"),
        ("oscillators", "oscil"),
        // short words are untouched
        ("as", "as"),
        ("is", "is"),
        // domain words used across the crate
        ("juices", "juic"),
        ("juice", "juic"),
        ("banana", "banana"),
        ("bananas", "banana"),
        ("breakfast", "breakfast"),
        ("breakfasts", "breakfast"),
        ("vegetables", "veget"),
        ("berries", "berri"),
        ("berry", "berri"),
        ("cooked", "cook"),
        ("baked", "bake"),
        ("baking", "bake"),
        ("grilled", "grill"),
        ("roasted", "roast"),
        ("canned", "can"),
    ];

    // The porter-stemmer crate deviates from the published algorithm in two
    // known ways: step 1c checks the vowel condition over the whole word
    // instead of the stem (so "sky" becomes "ski"), and in steps 2-4 a
    // matched suffix whose measure condition fails falls through to shorter
    // suffixes instead of consuming the step (so "element" becomes "elem").
    // This twin reproduces both quirks; any divergence from the oracle must
    // be fully explained by them.
    fn stem_like_oracle(word: &str) -> String {
        let mut w: Vec<char> = word.chars().collect();
        if w.len() <= 2 {
            return word.to_owned();
        }
        step_1a(&mut w);
        step_1b(&mut w);
        let n = w.len();
        if ends_with(&w, "y") && has_vowel(&w) {
            w[n - 1] = 'i';
        }
        rules_with_fallthrough(&mut w, STEP2_RULES);
        rules_with_fallthrough(&mut w, STEP3_RULES);
        step_4_with_fallthrough(&mut w);
        step_5a(&mut w);
        step_5b(&mut w);
        w.into_iter().collect()
    }

    fn rules_with_fallthrough(w: &mut Vec<char>, rules: &[(&str, &str)]) {
        for (suffix, replacement) in rules {
            if ends_with(w, suffix) {
                let stem_len = w.len() - suffix.chars().count();
                if measure(&w[..stem_len]) > 0 {
                    w.truncate(stem_len);
                    w.extend(replacement.chars());
                    return;
                }
            }
        }
    }

    fn step_4_with_fallthrough(w: &mut Vec<char>) {
        for suffix in STEP4_SUFFIXES {
            if ends_with(w, suffix) {
                let stem_len = w.len() - suffix.chars().count();
                let ion_ok =
                    *suffix != "ion" || (stem_len > 0 && matches!(w[stem_len - 1], 's' | 't'));
                if ion_ok && measure(&w[..stem_len]) > 1 {
                    w.truncate(stem_len);
                    return;
                }
            }
        }
    }

    #[test]
    fn matches_reference_pairs() {
        for (input, expected) in REFERENCE_PAIRS {
            assert_eq!(stem_word(input), *expected, "input {input:?}");
        }
    }

    #[test]
    fn oracle_cross_check_on_reference_pairs() {
        for (input, expected) in REFERENCE_PAIRS {
            let oracle = porter_stemmer::stem(input);
            if oracle != *expected {
                assert_eq!(
                    stem_like_oracle(input),
                    oracle,
                    "oracle diverges on {input:?} beyond its step 1c quirk"
                );
            }
        }
    }

    #[test]
    fn empty_and_short_tokens_pass_through() {
        assert_eq!(stem_word(""), "");
        assert_eq!(stem_word("a"), "a");
        assert_eq!(stem_word("ab"), "ab");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(2000))]

            // Differential test against an independent implementation of
            // the same published algorithm. Consecutive y's are excluded:
            // the reference crate classifies the second y of a "yy" pair
            // differently, and no English word contains one. Any other
            // disagreement must be exactly the oracle's step 1c quirk.
            #[test]
            fn agrees_with_reference_implementation(word in "[a-z]{3,12}") {
                prop_assume!(!word.contains("yy"));
                let mine = stem_word(&word);
                let oracle = porter_stemmer::stem(&word);
                if mine != oracle {
                    prop_assert_eq!(
                        stem_like_oracle(&word),
                        oracle,
                        "unexplained divergence on {:?}",
                        word
                    );
                }
            }

            // Random strings rarely end in interesting suffixes, so also
            // drive the comparison with suffix-heavy constructions.
            #[test]
            fn agrees_with_reference_on_suffixed_words(
                base in "[a-z]{1,6}",
                suffix in proptest::sample::select(vec![
                    "s", "sses", "ies", "eed", "ed", "ing", "y",
                    "ational", "tional", "enci", "anci", "izer", "abli",
                    "alli", "entli", "eli", "ousli", "ization", "ation",
                    "ator", "alism", "iveness", "fulness", "ousness",
                    "aliti", "iviti", "biliti", "icate", "ative", "alize",
                    "iciti", "ical", "ful", "ness", "al", "ance", "ence",
                    "er", "ic", "able", "ible", "ant", "ement", "ment",
                    "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive",
                    "ize", "e", "ll",
                ])
            ) {
                let word = format!("{base}{suffix}");
                prop_assume!(!word.contains("yy"));
                let mine = stem_word(&word);
                let oracle = porter_stemmer::stem(&word);
                if mine != oracle {
                    prop_assert_eq!(
                        stem_like_oracle(&word),
                        oracle,
                        "unexplained divergence on {:?}",
                        word
                    );
                }
            }

            #[test]
            fn output_is_never_longer(word in "[a-z]{1,14}") {
                prop_assert!(stem_word(&word).len() <= word.len() + 1);
            }
        }
    }
}
