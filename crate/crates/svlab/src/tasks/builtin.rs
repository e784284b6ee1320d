//! Bundled tasks: four functional word-mapping tasks and two behavioral
//! style-rewrite tasks, plus the vocabulary they induce.
//!
//! The functional tasks deliberately contest each other's inputs: most
//! antonym and synonym words also appear as capitalization inputs, so a bare
//! `"Q: {word}\nA:"` prompt is ambiguous about which mapping is wanted and
//! zero-shot accuracy stays well below ceiling. Country names are unique to
//! the capital task, which keeps its zero-shot baseline high. Behavioral
//! pairs rewrite a two-marker negative sentence into its positive twin over
//! a shared skeleton.

use crate::error::{Result, SvError};
use crate::tasks::spec::{ShiftRule, TaskPair, TaskSpec};

// ------------------------------------------------------------------
// Functional word lists
// ------------------------------------------------------------------

/// Antonym base pairs; each word appears in exactly one pair, and the task
/// uses both directions.
const ANTONYM_BASE: [(&str, &str); 110] = [
    ("big", "small"),
    ("hot", "cold"),
    ("fast", "slow"),
    ("tall", "short"),
    ("wide", "narrow"),
    ("thick", "thin"),
    ("heavy", "light"),
    ("hard", "soft"),
    ("early", "late"),
    ("open", "shut"),
    ("happy", "sad"),
    ("loud", "quiet"),
    ("bright", "dark"),
    ("clean", "dirty"),
    ("sharp", "dull"),
    ("sweet", "sour"),
    ("strong", "weak"),
    ("rich", "poor"),
    ("young", "old"),
    ("new", "ancient"),
    ("wet", "dry"),
    ("full", "empty"),
    ("high", "low"),
    ("long", "brief"),
    ("deep", "shallow"),
    ("smooth", "rough"),
    ("brave", "timid"),
    ("calm", "anxious"),
    ("cheap", "costly"),
    ("close", "distant"),
    ("warm", "cool"),
    ("tight", "loose"),
    ("fresh", "stale"),
    ("safe", "risky"),
    ("simple", "complex"),
    ("true", "false"),
    ("right", "wrong"),
    ("wild", "tame"),
    ("near", "far"),
    ("rapid", "sluggish"),
    ("silent", "noisy"),
    ("solid", "hollow"),
    ("straight", "crooked"),
    ("smart", "foolish"),
    ("kind", "cruel"),
    ("gentle", "harsh"),
    ("humble", "proud"),
    ("generous", "stingy"),
    ("honest", "deceitful"),
    ("polite", "rude"),
    ("tidy", "messy"),
    ("visible", "hidden"),
    ("awake", "asleep"),
    ("alive", "dead"),
    ("first", "last"),
    ("begin", "end"),
    ("accept", "refuse"),
    ("agree", "disagree"),
    ("arrive", "depart"),
    ("ascend", "descend"),
    ("attack", "defend"),
    ("buy", "sell"),
    ("push", "pull"),
    ("give", "take"),
    ("win", "lose"),
    ("love", "hate"),
    ("laugh", "cry"),
    ("rise", "fall"),
    ("float", "sink"),
    ("expand", "shrink"),
    ("gather", "scatter"),
    ("freeze", "melt"),
    ("lend", "borrow"),
    ("remember", "forget"),
    ("appear", "vanish"),
    ("build", "demolish"),
    ("join", "separate"),
    ("praise", "blame"),
    ("reward", "punish"),
    ("succeed", "fail"),
    ("increase", "decrease"),
    ("entrance", "exit"),
    ("question", "answer"),
    ("friend", "enemy"),
    ("day", "night"),
    ("summer", "winter"),
    ("north", "south"),
    ("east", "west"),
    ("top", "bottom"),
    ("front", "back"),
    ("inside", "outside"),
    ("above", "below"),
    ("before", "after"),
    ("always", "never"),
    ("more", "less"),
    ("many", "few"),
    ("all", "none"),
    ("everything", "nothing"),
    ("everyone", "nobody"),
    ("maximum", "minimum"),
    ("majority", "minority"),
    ("presence", "absence"),
    ("victory", "defeat"),
    ("courage", "fear"),
    ("pleasure", "pain"),
    ("comedy", "tragedy"),
    ("dawn", "dusk"),
    ("urban", "rural"),
    ("guilty", "innocent"),
    ("permanent", "temporary"),
];

/// Synonym base pairs, used in both directions. Most members reuse antonym
/// words so the same surface form competes across tasks.
const SYNONYM_BASE: [(&str, &str); 95] = [
    ("fast", "rapid"),
    ("slow", "sluggish"),
    ("quiet", "silent"),
    ("loud", "noisy"),
    ("near", "close"),
    ("far", "distant"),
    ("old", "ancient"),
    ("new", "fresh"),
    ("big", "huge"),
    ("small", "tiny"),
    ("hot", "boiling"),
    ("cold", "icy"),
    ("tall", "lofty"),
    ("short", "stubby"),
    ("wide", "broad"),
    ("narrow", "slim"),
    ("thick", "dense"),
    ("thin", "skinny"),
    ("heavy", "weighty"),
    ("light", "airy"),
    ("hard", "firm"),
    ("soft", "tender"),
    ("early", "prompt"),
    ("late", "tardy"),
    ("open", "ajar"),
    ("shut", "sealed"),
    ("happy", "content"),
    ("sad", "blue"),
    ("bright", "vivid"),
    ("dark", "dim"),
    ("clean", "spotless"),
    ("dirty", "filthy"),
    ("sharp", "keen"),
    ("dull", "blunt"),
    ("sweet", "sugary"),
    ("sour", "tart"),
    ("strong", "mighty"),
    ("weak", "feeble"),
    ("rich", "wealthy"),
    ("poor", "broke"),
    ("young", "youthful"),
    ("wet", "soaked"),
    ("dry", "parched"),
    ("full", "loaded"),
    ("empty", "vacant"),
    ("high", "elevated"),
    ("low", "sunken"),
    ("long", "lengthy"),
    ("brief", "fleeting"),
    ("deep", "profound"),
    ("smooth", "sleek"),
    ("rough", "coarse"),
    ("brave", "bold"),
    ("timid", "shy"),
    ("calm", "serene"),
    ("anxious", "nervous"),
    ("cheap", "inexpensive"),
    ("costly", "expensive"),
    ("warm", "toasty"),
    ("cool", "brisk"),
    ("tight", "snug"),
    ("loose", "slack"),
    ("stale", "musty"),
    ("safe", "secure"),
    ("risky", "perilous"),
    ("simple", "plain"),
    ("complex", "intricate"),
    ("true", "genuine"),
    ("false", "fake"),
    ("right", "correct"),
    ("wrong", "mistaken"),
    ("wild", "feral"),
    ("tame", "docile"),
    ("solid", "sturdy"),
    ("hollow", "void"),
    ("straight", "direct"),
    ("crooked", "bent"),
    ("smart", "clever"),
    ("foolish", "silly"),
    ("kind", "caring"),
    ("cruel", "mean"),
    ("gentle", "mild"),
    ("harsh", "severe"),
    ("humble", "modest"),
    ("proud", "vain"),
    ("generous", "lavish"),
    ("stingy", "greedy"),
    ("honest", "truthful"),
    ("polite", "civil"),
    ("rude", "impolite"),
    ("tidy", "neat"),
    ("messy", "untidy"),
    ("hidden", "concealed"),
    ("alive", "living"),
    ("dead", "lifeless"),
];

/// Extra capitalization-only inputs; uncontested by the other tasks.
const CAPITALIZE_EXTRAS: [&str; 20] = [
    "apple", "banana", "cherry", "grape", "lemon", "mango", "melon", "peach", "plum", "paris",
    "tiger", "zebra", "eagle", "falcon", "otter", "panda", "rabbit", "salmon", "spider", "turtle",
];

/// Country/capital pairs, single-word names only.
const COUNTRY_CAPITAL: [(&str, &str); 150] = [
    ("France", "Paris"),
    ("Germany", "Berlin"),
    ("Italy", "Rome"),
    ("Spain", "Madrid"),
    ("Portugal", "Lisbon"),
    ("Austria", "Vienna"),
    ("Greece", "Athens"),
    ("Norway", "Oslo"),
    ("Sweden", "Stockholm"),
    ("Finland", "Helsinki"),
    ("Denmark", "Copenhagen"),
    ("Iceland", "Reykjavik"),
    ("Ireland", "Dublin"),
    ("England", "London"),
    ("Scotland", "Edinburgh"),
    ("Wales", "Cardiff"),
    ("Poland", "Warsaw"),
    ("Hungary", "Budapest"),
    ("Romania", "Bucharest"),
    ("Bulgaria", "Sofia"),
    ("Serbia", "Belgrade"),
    ("Croatia", "Zagreb"),
    ("Slovenia", "Ljubljana"),
    ("Slovakia", "Bratislava"),
    ("Czechia", "Prague"),
    ("Ukraine", "Kyiv"),
    ("Belarus", "Minsk"),
    ("Russia", "Moscow"),
    ("Moldova", "Chisinau"),
    ("Lithuania", "Vilnius"),
    ("Latvia", "Riga"),
    ("Estonia", "Tallinn"),
    ("Netherlands", "Amsterdam"),
    ("Belgium", "Brussels"),
    ("Switzerland", "Bern"),
    ("Liechtenstein", "Vaduz"),
    ("Albania", "Tirana"),
    ("Montenegro", "Podgorica"),
    ("Macedonia", "Skopje"),
    ("Bosnia", "Sarajevo"),
    ("Cyprus", "Nicosia"),
    ("Malta", "Valletta"),
    ("Kosovo", "Pristina"),
    ("Turkey", "Ankara"),
    ("Georgia", "Tbilisi"),
    ("Armenia", "Yerevan"),
    ("Azerbaijan", "Baku"),
    ("Kazakhstan", "Astana"),
    ("Uzbekistan", "Tashkent"),
    ("Turkmenistan", "Ashgabat"),
    ("Kyrgyzstan", "Bishkek"),
    ("Tajikistan", "Dushanbe"),
    ("Afghanistan", "Kabul"),
    ("Pakistan", "Islamabad"),
    ("India", "Delhi"),
    ("Nepal", "Kathmandu"),
    ("Bhutan", "Thimphu"),
    ("Bangladesh", "Dhaka"),
    ("Myanmar", "Naypyidaw"),
    ("Thailand", "Bangkok"),
    ("Laos", "Vientiane"),
    ("Vietnam", "Hanoi"),
    ("Indonesia", "Jakarta"),
    ("Philippines", "Manila"),
    ("Japan", "Tokyo"),
    ("Mongolia", "Ulaanbaatar"),
    ("China", "Beijing"),
    ("Taiwan", "Taipei"),
    ("Korea", "Seoul"),
    ("Jordan", "Amman"),
    ("Syria", "Damascus"),
    ("Lebanon", "Beirut"),
    ("Israel", "Jerusalem"),
    ("Iraq", "Baghdad"),
    ("Iran", "Tehran"),
    ("Qatar", "Doha"),
    ("Bahrain", "Manama"),
    ("Oman", "Muscat"),
    ("Yemen", "Sanaa"),
    ("Maldives", "Male"),
    ("Egypt", "Cairo"),
    ("Libya", "Tripoli"),
    ("Tunisia", "Tunis"),
    ("Algeria", "Algiers"),
    ("Morocco", "Rabat"),
    ("Mauritania", "Nouakchott"),
    ("Senegal", "Dakar"),
    ("Mali", "Bamako"),
    ("Guinea", "Conakry"),
    ("Liberia", "Monrovia"),
    ("Ghana", "Accra"),
    ("Togo", "Lome"),
    ("Nigeria", "Abuja"),
    ("Niger", "Niamey"),
    ("Chad", "Ndjamena"),
    ("Cameroon", "Yaounde"),
    ("Gabon", "Libreville"),
    ("Congo", "Brazzaville"),
    ("Angola", "Luanda"),
    ("Namibia", "Windhoek"),
    ("Botswana", "Gaborone"),
    ("Zimbabwe", "Harare"),
    ("Zambia", "Lusaka"),
    ("Malawi", "Lilongwe"),
    ("Mozambique", "Maputo"),
    ("Tanzania", "Dodoma"),
    ("Kenya", "Nairobi"),
    ("Uganda", "Kampala"),
    ("Rwanda", "Kigali"),
    ("Burundi", "Gitega"),
    ("Somalia", "Mogadishu"),
    ("Eritrea", "Asmara"),
    ("Sudan", "Khartoum"),
    ("Madagascar", "Antananarivo"),
    ("Lesotho", "Maseru"),
    ("Eswatini", "Mbabane"),
    ("Seychelles", "Victoria"),
    ("Comoros", "Moroni"),
    ("Gambia", "Banjul"),
    ("Canada", "Ottawa"),
    ("Cuba", "Havana"),
    ("Jamaica", "Kingston"),
    ("Honduras", "Tegucigalpa"),
    ("Nicaragua", "Managua"),
    ("Colombia", "Bogota"),
    ("Venezuela", "Caracas"),
    ("Ecuador", "Quito"),
    ("Peru", "Lima"),
    ("Bolivia", "Sucre"),
    ("Chile", "Santiago"),
    ("Uruguay", "Montevideo"),
    ("Paraguay", "Asuncion"),
    ("Brazil", "Brasilia"),
    ("Guyana", "Georgetown"),
    ("Suriname", "Paramaribo"),
    ("Belize", "Belmopan"),
    ("Barbados", "Bridgetown"),
    ("Bahamas", "Nassau"),
    ("Dominica", "Roseau"),
    ("Greenland", "Nuuk"),
    ("Bermuda", "Hamilton"),
    ("Australia", "Canberra"),
    ("Fiji", "Suva"),
    ("Samoa", "Apia"),
    ("Tonga", "Nukualofa"),
    ("Micronesia", "Palikir"),
    ("Palau", "Ngerulmud"),
    ("Nauru", "Yaren"),
    ("Tuvalu", "Funafuti"),
    ("Kiribati", "Tarawa"),
];

// ------------------------------------------------------------------
// Behavioral sentence generators
// ------------------------------------------------------------------

const DETOX_SUBJECTS: [&str; 20] = [
    "waiter", "driver", "neighbor", "manager", "barista", "plumber", "teacher", "vendor",
    "clerk", "landlord", "referee", "cashier", "janitor", "tailor", "courier", "butcher",
    "florist", "barber", "banker", "tutor",
];

const SENTIMENT_SUBJECTS: [&str; 20] = [
    "movie", "dinner", "concert", "journey", "novel", "garden", "painting", "lecture",
    "picnic", "festival", "sunset", "melody", "recipe", "ballad", "mural", "voyage",
    "seminar", "brunch", "parade", "carnival",
];

const TIMES: [&str; 3] = ["monday", "friday", "sunday"];

const DETOX_NEG_A: [&str; 10] = [
    "awful", "horrid", "dreadful", "rotten", "nasty", "lousy", "stupid", "pathetic",
    "worthless", "shabby",
];
const DETOX_NEG_B: [&str; 7] = [
    "hostile", "obnoxious", "sloppy", "careless", "vulgar", "spiteful", "crude",
];
const DETOX_POS_A: [&str; 10] = [
    "courteous", "lovely", "gracious", "pleasant", "thoughtful", "charming", "respectful",
    "welcoming", "decent", "friendly",
];
const DETOX_POS_B: [&str; 7] = [
    "considerate", "attentive", "cordial", "helpful", "tactful", "sincere", "cheery",
];

const SENTIMENT_NEG_A: [&str; 10] = [
    "gloomy", "miserable", "bleak", "dismal", "dreary", "unhappy", "sorrowful", "grim",
    "melancholy", "somber",
];
const SENTIMENT_NEG_B: [&str; 7] = [
    "tearful", "joyless", "mournful", "despairing", "heartbroken", "downcast", "hopeless",
];
const SENTIMENT_POS_A: [&str; 10] = [
    "joyful", "cheerful", "delightful", "wonderful", "radiant", "upbeat", "merry", "glad",
    "blissful", "jubilant",
];
const SENTIMENT_POS_B: [&str; 7] = [
    "uplifting", "heartwarming", "festive", "vibrant", "joyous", "gleeful", "sunny",
];

/// Renders sentence `frame` for `subject`/`time` with a marker pair.
fn render_frame(frame: usize, subject: &str, m1: &str, m2: &str, time: &str) -> String {
    match frame {
        0 => format!("the {subject} seemed {m1} and {m2} this {time}"),
        1 => format!("that {subject} was {m1} and {m2} {time}"),
        2 => format!("my {subject} acted {m1} and {m2} last {time}"),
        3 => format!("every {subject} sounded {m1} and {m2} {time}"),
        _ => format!("one {subject} stayed {m1} and {m2} through {time}"),
    }
}

fn render_thing_frame(frame: usize, subject: &str, m1: &str, m2: &str, time: &str) -> String {
    match frame {
        0 => format!("the {subject} felt {m1} and {m2} this {time}"),
        1 => format!("that {subject} was {m1} and {m2} {time}"),
        2 => format!("our {subject} turned {m1} and {m2} last {time}"),
        3 => format!("every {subject} seemed {m1} and {m2} {time}"),
        _ => format!("one {subject} stayed {m1} and {m2} through {time}"),
    }
}

/// Builds the 300 sentence pairs of one behavioral task: every
/// (subject, frame, time) combination once, with the negative markers of the
/// input swapped for the positive markers in the output.
fn behavioral_pairs(
    subjects: &[&str; 20],
    neg_a: &[&str; 10],
    neg_b: &[&str; 7],
    pos_a: &[&str; 10],
    pos_b: &[&str; 7],
    things: bool,
) -> Vec<TaskPair> {
    let mut pairs = Vec::with_capacity(subjects.len() * 5 * TIMES.len());
    let mut index = 0usize;
    for subject in subjects {
        for frame in 0..5 {
            for time in &TIMES {
                let (na, nb) = (neg_a[index % 10], neg_b[index % 7]);
                let (pa, pb) = (pos_a[index % 10], pos_b[index % 7]);
                let (input, output) = if things {
                    (
                        render_thing_frame(frame, subject, na, nb, time),
                        render_thing_frame(frame, subject, pa, pb, time),
                    )
                } else {
                    (
                        render_frame(frame, subject, na, nb, time),
                        render_frame(frame, subject, pa, pb, time),
                    )
                };
                pairs.push(TaskPair::new(input, output));
                index += 1;
            }
        }
    }
    pairs
}

// ------------------------------------------------------------------
// Task constructors
// ------------------------------------------------------------------

fn directed(base: &[(&str, &str)]) -> Vec<TaskPair> {
    let mut pairs = Vec::with_capacity(base.len() * 2);
    for &(a, b) in base {
        pairs.push(TaskPair::new(a, b));
        pairs.push(TaskPair::new(b, a));
    }
    pairs
}

fn capitalize_ascii(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn antonym_task() -> Result<TaskSpec> {
    TaskSpec::functional(
        "antonym",
        directed(&ANTONYM_BASE),
        vec![
            "The exact opposite of {q} is".into(),
            "Everyone agrees that {q} is the reverse of".into(),
            "If something is not {q} then it is".into(),
        ],
    )
}

fn synonym_task() -> Result<TaskSpec> {
    TaskSpec::functional(
        "synonym",
        directed(&SYNONYM_BASE),
        vec![
            "Another word for {q} is".into(),
            "People often say {q} when they mean".into(),
            "A word that means the same as {q} is".into(),
        ],
    )
}

fn capitalize_task() -> Result<TaskSpec> {
    let mut words: Vec<&str> = Vec::new();
    for &(a, b) in ANTONYM_BASE.iter().chain(SYNONYM_BASE.iter()) {
        words.push(a);
        words.push(b);
    }
    words.extend(CAPITALIZE_EXTRAS);
    words.sort_unstable();
    words.dedup();
    let pairs = words
        .into_iter()
        .map(|w| TaskPair::new(w, capitalize_ascii(w)))
        .collect();
    TaskSpec::functional(
        "capitalize",
        pairs,
        vec![
            "The capitalized form of {q} is".into(),
            "Written at the start of a sentence, {q} becomes".into(),
            "With its first letter uppercase, {q} reads".into(),
        ],
    )
}

fn country_capital_task() -> Result<TaskSpec> {
    TaskSpec::functional(
        "country-capital",
        COUNTRY_CAPITAL
            .iter()
            .map(|&(c, k)| TaskPair::new(c, k))
            .collect(),
        vec![
            "When I think of {q}, its capital".into(),
            "The capital city of {q} is called".into(),
            "My atlas says the capital of {q} is".into(),
        ],
    )
}

fn detox_task() -> Result<TaskSpec> {
    TaskSpec::behavioral(
        "detox-marker",
        behavioral_pairs(
            &DETOX_SUBJECTS,
            &DETOX_NEG_A,
            &DETOX_NEG_B,
            &DETOX_POS_A,
            &DETOX_POS_B,
            false,
        ),
        ShiftRule::ConfidentNegativeFails,
    )
}

fn sentiment_task() -> Result<TaskSpec> {
    TaskSpec::behavioral(
        "sentiment-marker",
        behavioral_pairs(
            &SENTIMENT_SUBJECTS,
            &SENTIMENT_NEG_A,
            &SENTIMENT_NEG_B,
            &SENTIMENT_POS_A,
            &SENTIMENT_POS_B,
            true,
        ),
        ShiftRule::RequirePositive,
    )
}

/// All six bundled tasks.
///
/// # Errors
/// Propagates validation failures (none are expected for the bundled data).
pub fn builtin_tasks() -> Result<Vec<TaskSpec>> {
    Ok(vec![
        antonym_task()?,
        synonym_task()?,
        capitalize_task()?,
        country_capital_task()?,
        detox_task()?,
        sentiment_task()?,
    ])
}

/// One bundled task by name.
///
/// # Errors
/// Config error naming the unknown task and listing the known ones.
pub fn builtin_task(name: &str) -> Result<TaskSpec> {
    let tasks = builtin_tasks()?;
    let known: Vec<String> = tasks.iter().map(|t| t.name.clone()).collect();
    tasks.into_iter().find(|t| t.name == name).ok_or_else(|| {
        SvError::config(format!("unknown task {name:?}; bundled tasks: {known:?}"))
    })
}

/// Marker lexicon of the detox task as `(positive, negative)` word lists.
#[must_use]
pub fn detox_markers() -> (Vec<String>, Vec<String>) {
    let positive = DETOX_POS_A
        .iter()
        .chain(DETOX_POS_B.iter())
        .map(|&w| w.to_string())
        .collect();
    let negative = DETOX_NEG_A
        .iter()
        .chain(DETOX_NEG_B.iter())
        .map(|&w| w.to_string())
        .collect();
    (positive, negative)
}

/// Marker lexicon of the sentiment task as `(positive, negative)` word lists.
#[must_use]
pub fn sentiment_markers() -> (Vec<String>, Vec<String>) {
    let positive = SENTIMENT_POS_A
        .iter()
        .chain(SENTIMENT_POS_B.iter())
        .map(|&w| w.to_string())
        .collect();
    let negative = SENTIMENT_NEG_A
        .iter()
        .chain(SENTIMENT_NEG_B.iter())
        .map(|&w| w.to_string())
        .collect();
    (positive, negative)
}

/// Every word the bundled tasks, fillers, and templates can produce. Feeding
/// this to the tokenizer guarantees closed-vocabulary encoding for all
/// bundled prompts and episodes.
#[must_use]
pub fn builtin_vocabulary() -> Vec<String> {
    let mut words: Vec<String> = Vec::new();
    let mut push_text = |text: &str| {
        for raw in text.split_whitespace() {
            if raw.contains("{q}") {
                continue;
            }
            let word = raw.trim_matches(|c: char| c.is_ascii_punctuation());
            if !word.is_empty() {
                words.push(word.to_string());
            }
        }
    };
    if let Ok(tasks) = builtin_tasks() {
        for task in &tasks {
            for pair in &task.pairs {
                push_text(&pair.input);
                push_text(&pair.output);
            }
            for template in &task.natural_templates {
                push_text(template);
            }
        }
    }
    for filler in crate::tasks::contrast::FILLER_PHRASES {
        push_text(filler);
    }
    words.sort_unstable();
    words.dedup();
    words
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::spec::TaskCategory;
    use std::collections::HashSet;

    #[test]
    fn bundled_tasks_validate_with_expected_sizes() {
        let tasks = builtin_tasks().unwrap();
        assert_eq!(tasks.len(), 6);
        let sizes: Vec<(&str, usize)> = tasks
            .iter()
            .map(|t| (t.name.as_str(), t.pairs.len()))
            .collect();
        assert_eq!(
            sizes,
            vec![
                ("antonym", 220),
                ("synonym", 190),
                ("capitalize", 327),
                ("country-capital", 150),
                ("detox-marker", 300),
                ("sentiment-marker", 300),
            ]
        );
        for task in &tasks {
            task.validate().unwrap();
            assert_eq!(task.splits.train.len() + task.splits.test.len(), task.pairs.len());
        }
    }

    #[test]
    fn pinned_examples_present() {
        let antonym = builtin_task("antonym").unwrap();
        let has = |t: &TaskSpec, a: &str, b: &str| {
            t.pairs.iter().any(|p| p.input == a && p.output == b)
        };
        assert!(has(&antonym, "big", "small"));
        assert!(has(&antonym, "small", "big"));
        assert!(has(&antonym, "hot", "cold"));
        let capitalize = builtin_task("capitalize").unwrap();
        assert!(has(&capitalize, "paris", "Paris"));
        assert!(has(&capitalize, "apple", "Apple"));
        let country = builtin_task("country-capital").unwrap();
        assert!(has(&country, "France", "Paris"));
        assert!(country
            .natural_templates
            .contains(&"When I think of {q}, its capital".to_string()));
    }

    #[test]
    fn functional_inputs_heavily_contested() {
        let tasks = builtin_tasks().unwrap();
        let inputs = |name: &str| -> HashSet<String> {
            tasks
                .iter()
                .find(|t| t.name == name)
                .unwrap()
                .pairs
                .iter()
                .map(|p| p.input.clone())
                .collect()
        };
        let antonym = inputs("antonym");
        let synonym = inputs("synonym");
        let capitalize = inputs("capitalize");
        let three_way = capitalize
            .iter()
            .filter(|w| antonym.contains(*w) && synonym.contains(*w))
            .count();
        assert!(
            three_way * 100 >= capitalize.len() * 30,
            "only {three_way}/{} capitalization inputs are three-way contested",
            capitalize.len()
        );
        // Country names stay out of the word-level turf war.
        let country = inputs("country-capital");
        assert!(country.is_disjoint(&capitalize));
        assert!(country.is_disjoint(&antonym));
    }

    #[test]
    fn behavioral_sentences_well_formed() {
        for name in ["detox-marker", "sentiment-marker"] {
            let task = builtin_task(name).unwrap();
            assert_eq!(task.category, TaskCategory::Behavioral);
            let (positive, negative) = if name == "detox-marker" {
                detox_markers()
            } else {
                sentiment_markers()
            };
            for pair in &task.pairs {
                for side in [&pair.input, &pair.output] {
                    let words: Vec<&str> = side.split_whitespace().collect();
                    assert!(
                        (5..=8).contains(&words.len()),
                        "{side:?} has {} words",
                        words.len()
                    );
                    assert!(
                        side.chars().all(|c| !c.is_ascii_punctuation()),
                        "{side:?} contains punctuation"
                    );
                }
                let neg_hits = pair
                    .input
                    .split_whitespace()
                    .filter(|w| negative.contains(&(*w).to_string()))
                    .count();
                let pos_hits = pair
                    .output
                    .split_whitespace()
                    .filter(|w| positive.contains(&(*w).to_string()))
                    .count();
                assert_eq!(neg_hits, 2, "{:?}", pair.input);
                assert_eq!(pos_hits, 2, "{:?}", pair.output);
            }
        }
    }

    #[test]
    fn vocabulary_covers_all_bundled_text() {
        let vocab = builtin_vocabulary();
        let set: HashSet<&str> = vocab.iter().map(String::as_str).collect();
        assert!(vocab.len() > 900, "vocabulary has {} words", vocab.len());
        assert!(set.contains("Paris") && set.contains("paris"));
        assert!(set.contains("quite") && set.contains("so"));
        assert!(set.contains("capital"));
        // Sorted and deduplicated.
        let mut sorted = vocab.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(vocab, sorted);
    }
}
