//! Generator for Hungarian-style sentences over a fixed lexicon.
//!
//! Sentences follow a handful of templates with vowel-harmony suffixes,
//! noun compounds and word pairs whose diacritized form depends on the
//! surrounding words (meg/még, el/él, sor/sör, ...). Used for desk-scale
//! experiments when no real corpus is at hand.

use rand::seq::SliceRandom;
use rand::Rng;

use nnkernel::rng::KernelRng;

/// (nominative, accusative)
const NOUNS: &[(&str, &str)] = &[
    ("alma", "almát"),
    ("körte", "körtét"),
    ("szilva", "szilvát"),
    ("ház", "házat"),
    ("kert", "kertet"),
    ("asztal", "asztalt"),
    ("szék", "széket"),
    ("ablak", "ablakot"),
    ("ajtó", "ajtót"),
    ("könyv", "könyvet"),
    ("újság", "újságot"),
    ("autó", "autót"),
    ("busz", "buszt"),
    ("vonat", "vonatot"),
    ("hajó", "hajót"),
    ("kutya", "kutyát"),
    ("macska", "macskát"),
    ("virág", "virágot"),
    ("fa", "fát"),
    ("erdő", "erdőt"),
    ("mező", "mezőt"),
    ("folyó", "folyót"),
    ("hegy", "hegyet"),
    ("völgy", "völgyet"),
    ("sziget", "szigetet"),
    ("város", "várost"),
    ("utca", "utcát"),
    ("templom", "templomot"),
    ("iskola", "iskolát"),
    ("óra", "órát"),
    ("tanár", "tanárt"),
    ("diák", "diákot"),
    ("orvos", "orvost"),
    ("mérnök", "mérnököt"),
    ("szakács", "szakácsot"),
    ("rendőr", "rendőrt"),
    ("szomszéd", "szomszédot"),
    ("barát", "barátot"),
    ("testvér", "testvért"),
    ("gyerek", "gyereket"),
    ("ember", "embert"),
    ("ünnep", "ünnepet"),
    ("vacsora", "vacsorát"),
    ("ebéd", "ebédet"),
    ("leves", "levest"),
    ("sütemény", "süteményt"),
    ("kávé", "kávét"),
    ("tea", "teát"),
    ("tej", "tejet"),
    ("gyümölcs", "gyümölcsöt"),
    ("zöldség", "zöldséget"),
    ("hús", "húst"),
    ("sajt", "sajtot"),
    ("só", "sót"),
    ("paprika", "paprikát"),
    ("hagyma", "hagymát"),
    ("krumpli", "krumplit"),
    ("kabát", "kabátot"),
    ("cipő", "cipőt"),
    ("sapka", "sapkát"),
    ("táska", "táskát"),
    ("kulcs", "kulcsot"),
    ("levél", "levelet"),
    ("kép", "képet"),
    ("szoba", "szobát"),
    ("konyha", "konyhát"),
    ("fürdő", "fürdőt"),
    ("kapu", "kaput"),
    ("kerítés", "kerítést"),
    ("bolt", "boltot"),
    ("piac", "piacot"),
    ("múzeum", "múzeumot"),
    ("könyvtár", "könyvtárat"),
    ("kórház", "kórházat"),
    ("egyetem", "egyetemet"),
    ("hivatal", "hivatalt"),
    ("állomás", "állomást"),
    ("repülőtér", "repülőteret"),
    ("tükör", "tükröt"),
    ("ágy", "ágyat"),
    ("párna", "párnát"),
    ("lámpa", "lámpát"),
    ("gép", "gépet"),
    ("telefon", "telefont"),
    ("füzet", "füzetet"),
    ("toll", "tollat"),
    ("ceruza", "ceruzát"),
    ("bögre", "bögrét"),
    ("pohár", "poharat"),
    ("tányér", "tányért"),
    ("kés", "kést"),
    ("villa", "villát"),
    ("kanál", "kanalat"),
    ("hordó", "hordót"),
    ("üveg", "üveget"),
    ("dal", "dalt"),
    ("mese", "mesét"),
    ("történet", "történetet"),
    ("játék", "játékot"),
    ("labda", "labdát"),
    ("kesztyű", "kesztyűt"),
    ("sál", "sálat"),
    ("ing", "inget"),
    ("szoknya", "szoknyát"),
    ("nadrág", "nadrágot"),
    ("fésű", "fésűt"),
    ("szappan", "szappant"),
    ("törölköző", "törölközőt"),
    ("függöny", "függönyt"),
    ("szőnyeg", "szőnyeget"),
    ("kályha", "kályhát"),
    ("kémény", "kéményt"),
    ("tető", "tetőt"),
    ("fal", "falat"),
    ("lépcső", "lépcsőt"),
    ("pince", "pincét"),
    ("padlás", "padlást"),
    ("udvar", "udvart"),
    ("kút", "kutat"),
    ("ösvény", "ösvényt"),
    ("rét", "rétet"),
    ("tölgy", "tölgyet"),
    ("bükk", "bükköt"),
    ("fenyő", "fenyőt"),
    ("nyúl", "nyulat"),
    ("róka", "rókát"),
    ("őz", "őzet"),
    ("medve", "medvét"),
    ("farkas", "farkast"),
    ("sün", "sünt"),
    ("csiga", "csigát"),
    ("méh", "méhet"),
    ("pillangó", "pillangót"),
    ("hal", "halat"),
    ("béka", "békát"),
    ("tyúk", "tyúkot"),
    ("kacsa", "kacsát"),
    ("liba", "libát"),
    ("tehén", "tehenet"),
    ("disznó", "disznót"),
    ("bárány", "bárányt"),
    ("kecske", "kecskét"),
];

/// (3sg present, 3sg past indefinite, 3sg past definite)
const TRANSITIVE: &[(&str, &str, &str)] = &[
    ("lát", "látott", "látta"),
    ("néz", "nézett", "nézte"),
    ("vesz", "vett", "vette"),
    ("olvas", "olvasott", "olvasta"),
    ("ír", "írt", "írta"),
    ("keres", "keresett", "kereste"),
    ("talál", "talált", "találta"),
    ("főz", "főzött", "főzte"),
    ("süt", "sütött", "sütötte"),
    ("szeret", "szeretett", "szerette"),
    ("vár", "várt", "várta"),
    ("hoz", "hozott", "hozta"),
    ("visz", "vitt", "vitte"),
    ("kér", "kért", "kérte"),
    ("ad", "adott", "adta"),
    ("fest", "festett", "festette"),
    ("rajzol", "rajzolt", "rajzolta"),
    ("javít", "javított", "javította"),
    ("épít", "épített", "építette"),
    ("tör", "tört", "törte"),
    ("küld", "küldött", "küldte"),
    ("fizet", "fizetett", "fizette"),
    ("mos", "mosott", "mosta"),
    ("hall", "hallott", "hallotta"),
    ("követ", "követett", "követte"),
    ("vág", "vágott", "vágta"),
    ("húz", "húzott", "húzta"),
    ("ismer", "ismert", "ismerte"),
    ("díszít", "díszített", "díszítette"),
    ("választ", "választott", "választotta"),
    ("mutat", "mutatott", "mutatta"),
    ("nyit", "nyitott", "nyitotta"),
    ("zár", "zárt", "zárta"),
    ("dob", "dobott", "dobta"),
    ("kóstol", "kóstolt", "kóstolta"),
    ("vásárol", "vásárolt", "vásárolta"),
    ("számol", "számolt", "számolta"),
    ("fényképez", "fényképezett", "fényképezte"),
    ("tisztít", "tisztított", "tisztította"),
    ("söpör", "söpört", "söpörte"),
];

/// (3sg present, 3sg past)
const INTRANSITIVE: &[(&str, &str)] = &[
    ("ül", "ült"),
    ("áll", "állt"),
    ("fut", "futott"),
    ("sétál", "sétált"),
    ("dolgozik", "dolgozott"),
    ("tanul", "tanult"),
    ("alszik", "aludt"),
    ("úszik", "úszott"),
    ("nevet", "nevetett"),
    ("sír", "sírt"),
    ("beszél", "beszélt"),
    ("énekel", "énekelt"),
    ("táncol", "táncolt"),
    ("pihen", "pihent"),
    ("játszik", "játszott"),
    ("olvas", "olvasott"),
    ("főz", "főzött"),
    ("várakozik", "várakozott"),
    ("reggelizik", "reggelizett"),
    ("ebédel", "ebédelt"),
];

const ADJECTIVES: &[&str] = &[
    "nagy", "kicsi", "szép", "új", "régi", "fehér", "fekete", "piros", "zöld", "kék", "sárga", "hosszú", "rövid",
    "magas", "alacsony", "gyönyörű", "öreg", "fiatal", "okos", "híres", "csendes", "hideg", "meleg", "édes",
    "keserű", "nehéz", "könnyű", "gyors", "lassú", "barna", "szürke", "tiszta", "különös", "érdekes", "fontos",
    "boldog", "szomorú", "erős", "gyenge", "drága", "olcsó", "friss", "sötét", "világos", "fényes", "kerek",
    "széles", "keskeny", "mély", "sekély", "büszke", "bátor", "félénk", "vidám", "komoly", "furcsa", "üres",
];

const NAMES: &[&str] = &[
    "Péter", "Anna", "Gábor", "Zsófia", "Bence", "Réka", "Dávid", "Eszter", "Tamás", "Júlia", "Máté", "Lőrinc",
    "Ádám", "Éva", "Ödön", "Ágnes", "Béla", "Kata", "Zoltán", "Ilona", "Gergő", "Dóra", "Levente", "Nóra", "Áron",
    "Kinga", "Márton", "Csilla", "Jenő", "Sára",
];

/// (name, to, from, in)
const PLACES: &[(&str, &str, &str, &str)] = &[
    ("Budapest", "Budapestre", "Budapestről", "Budapesten"),
    ("Szeged", "Szegedre", "Szegedről", "Szegeden"),
    ("Pécs", "Pécsre", "Pécsről", "Pécsen"),
    ("Győr", "Győrbe", "Győrből", "Győrben"),
    ("Debrecen", "Debrecenbe", "Debrecenből", "Debrecenben"),
    ("Eger", "Egerbe", "Egerből", "Egerben"),
    ("Sopron", "Sopronba", "Sopronból", "Sopronban"),
    ("Kecskemét", "Kecskemétre", "Kecskemétről", "Kecskeméten"),
    ("Miskolc", "Miskolcra", "Miskolcról", "Miskolcon"),
    ("Veszprém", "Veszprémbe", "Veszprémből", "Veszprémben"),
    ("Tihany", "Tihanyba", "Tihanyból", "Tihanyban"),
    ("Szombathely", "Szombathelyre", "Szombathelyről", "Szombathelyen"),
    ("Nyíregyháza", "Nyíregyházára", "Nyíregyházáról", "Nyíregyházán"),
    ("Székesfehérvár", "Székesfehérvárra", "Székesfehérvárról", "Székesfehérváron"),
    ("Kőszeg", "Kőszegre", "Kőszegről", "Kőszegen"),
    ("Gödöllő", "Gödöllőre", "Gödöllőről", "Gödöllőn"),
];

const ADVERBS: &[&str] = &[
    "tegnap", "ma", "holnap", "gyakran", "mindig", "néha", "reggel", "este", "délután", "végül", "hirtelen", "lassan",
    "gyorsan", "szívesen", "újra", "általában", "múlt héten", "vasárnap", "hétfőn", "csütörtökön", "ősszel",
    "tavasszal", "nyáron", "télen",
];

const PERSON_NOUNS: &[&str] = &[
    "tanár", "diák", "orvos", "mérnök", "szakács", "rendőr", "szomszéd", "barát", "testvér", "gyerek", "ember",
];

#[derive(Clone, Copy, PartialEq)]
enum Harmony {
    Back,
    Front,
    Rounded,
}

fn harmony(stem: &str) -> Harmony {
    if stem.chars().any(|c| "aáoóuú".contains(c)) {
        return Harmony::Back;
    }
    match stem.chars().rev().find(|c| "eéöőüű".contains(*c)) {
        Some(c) if "öőüű".contains(c) => Harmony::Rounded,
        _ => Harmony::Front,
    }
}

/// Final a/e lengthen before a suffix: alma → almá-.
fn oblique_stem(stem: &str) -> String {
    match stem.chars().last() {
        Some('a') => format!("{}á", &stem[..stem.len() - 1]),
        Some('e') => format!("{}é", &stem[..stem.len() - 1]),
        _ => stem.to_string(),
    }
}

#[derive(Clone, Copy)]
enum Case {
    Inessive,
    Elative,
    Illative,
    Delative,
    Sublative,
    Adessive,
    Ablative,
    Allative,
    Dative,
    Causal,
    Plural,
}

const CASES: &[Case] = &[
    Case::Inessive,
    Case::Elative,
    Case::Illative,
    Case::Delative,
    Case::Sublative,
    Case::Adessive,
    Case::Ablative,
    Case::Allative,
    Case::Dative,
    Case::Causal,
    Case::Plural,
];

fn inflect(stem: &str, case: Case) -> String {
    let h = harmony(stem);
    let pick = |back: &'static str, front: &'static str, rounded: &'static str| match h {
        Harmony::Back => back,
        Harmony::Front => front,
        Harmony::Rounded => rounded,
    };
    let two = |back, front| pick(back, front, front);
    let suffix = match case {
        Case::Inessive => two("ban", "ben"),
        Case::Elative => two("ból", "ből"),
        Case::Illative => two("ba", "be"),
        Case::Delative => two("ról", "ről"),
        Case::Sublative => two("ra", "re"),
        Case::Adessive => two("nál", "nél"),
        Case::Ablative => two("tól", "től"),
        Case::Allative => pick("hoz", "hez", "höz"),
        Case::Dative => two("nak", "nek"),
        Case::Causal => "ért",
        Case::Plural => {
            let vowel_final = stem.chars().last().is_some_and(|c| "aáeéiíoóöőuúüű".contains(c));
            if vowel_final {
                "k"
            } else {
                pick("ok", "ek", "ök")
            }
        }
    };
    format!("{}{suffix}", oblique_stem(stem))
}

fn article(word: &str) -> &'static str {
    match word.chars().next() {
        Some(c) if "aáeéiíoóöőuúüűAÁEÉIÍOÓÖŐUÚÜŰ".contains(c) => "az",
        _ => "a",
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Deterministic stream of synthetic sentences.
pub struct SyntheticHungarian {
    rng: KernelRng,
}

impl SyntheticHungarian {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: nnkernel::rng::rng_from_seed(seed),
        }
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        *items.choose(&mut self.rng).expect("non-empty lexicon")
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn subject(&mut self) -> String {
        if self.chance(0.6) {
            self.pick(NAMES).to_string()
        } else {
            let n = self.pick(PERSON_NOUNS);
            let adj = if self.chance(0.4) {
                format!("{} ", self.pick(ADJECTIVES))
            } else {
                String::new()
            };
            let head = format!("{adj}{n}");
            format!("{} {head}", capitalize(article(&head)))
        }
    }

    fn noun(&mut self) -> (&'static str, &'static str) {
        self.pick(NOUNS)
    }

    /// A compound like "almafa"; usually unseen as a whole.
    fn compound(&mut self) -> String {
        let (a, _) = self.noun();
        let (b, _) = self.noun();
        format!("{a}{b}")
    }

    fn adverb(&mut self) -> String {
        if self.chance(0.5) {
            format!(" {}", self.pick(ADVERBS))
        } else {
            String::new()
        }
    }

    fn definite_object(&mut self) -> String {
        let (_, acc) = self.noun();
        if self.chance(0.4) {
            let adj = self.pick(ADJECTIVES);
            format!("{} {adj} {acc}", article(adj))
        } else {
            format!("{} {acc}", article(acc))
        }
    }

    pub fn sentence(&mut self) -> String {
        match self.rng.gen_range(0..20) {
            0..=2 => {
                let s = self.subject();
                let adv = self.adverb();
                let (_, past, def) = self.pick(TRANSITIVE);
                if self.chance(0.5) {
                    let obj = self.definite_object();
                    format!("{s}{adv} {obj} {def}.")
                } else {
                    let (_, acc) = self.noun();
                    let adj = self.pick(ADJECTIVES);
                    format!("{s}{adv} egy {adj} {acc} {past}.")
                }
            }
            3 | 4 => {
                let s = self.subject();
                let (n, _) = self.noun();
                let case = self.pick(&[Case::Inessive, Case::Adessive, Case::Sublative]);
                let place = inflect(n, case);
                let (pres, past) = self.pick(INTRANSITIVE);
                let verb = if self.chance(0.5) { pres } else { past };
                format!("{s} {} {place} {verb}.", article(&place))
            }
            5 => {
                let s = self.subject();
                let (_, to, from, _) = self.pick(PLACES);
                let adv = self.adverb();
                if self.chance(0.5) {
                    format!("{s}{adv} {to} utazott.")
                } else {
                    format!("{s}{adv} {from} érkezett.")
                }
            }
            6 => {
                let (n, _) = self.noun();
                let case = self.pick(CASES);
                let form = inflect(n, case);
                let (m, _) = self.noun();
                let adj = self.pick(ADJECTIVES);
                format!("{} {form} {} {adj} {m} volt.", capitalize(article(&form)), article(adj))
            }
            7 => {
                let c = self.compound();
                let adj = self.pick(ADJECTIVES);
                let s = self.subject();
                if self.chance(0.5) {
                    format!("{} {c} {adj} volt.", capitalize(article(&c)))
                } else {
                    let case = self.pick(CASES);
                    let form = inflect(&c, case);
                    format!("{s} {} {form} gondolt.", article(&form))
                }
            }
            8 => {
                let count = self.rng.gen_range(2..=99);
                let (n, _) = self.noun();
                let (m, _) = self.noun();
                let place = inflect(m, Case::Inessive);
                format!("{count} {n} volt {} {place}.", article(&place))
            }
            // Context-dependent pairs from here on.
            9 => {
                let s = self.subject();
                let (_, _, def) = self.pick(TRANSITIVE);
                let obj = self.definite_object();
                if self.chance(0.5) {
                    format!("{s} még nem {def} {obj}.")
                } else {
                    let adv = self.adverb();
                    format!("{s}{adv} {def} meg {obj}.")
                }
            }
            10 => {
                let s = self.subject();
                if self.chance(0.5) {
                    let (_, _, _, at) = self.pick(PLACES);
                    let still = if self.chance(0.3) { " még mindig" } else { "" };
                    format!("{s}{still} {at} él.")
                } else {
                    let (n, _) = self.noun();
                    let to = inflect(n, Case::Illative);
                    format!("{s} nem ment el {} {to}.", article(&to))
                }
            }
            11 => {
                let s = self.subject();
                match self.rng.gen_range(0..3) {
                    0 => format!("{s} fél órát várt az állomáson."),
                    1 => {
                        let (n, _) = self.noun();
                        let from = inflect(n, Case::Ablative);
                        format!("{s} fél {} {from}.", article(&from))
                    }
                    _ => {
                        let (n, _) = self.noun();
                        let top = inflect(n, Case::Delative);
                        format!("{s} nem nézett fel {} {top}.", article(&top))
                    }
                }
            }
            12 => {
                let s = self.subject();
                match self.rng.gen_range(0..4) {
                    0 => format!("{s} egy hideg sört ivott."),
                    1 => format!("{s} sorban állt a boltban."),
                    2 => format!("A sor {} volt.", self.pick(&["hosszú", "rövid", "lassú"])),
                    _ => format!("A sör {} volt.", self.pick(&["hideg", "meleg", "keserű", "friss"])),
                }
            }
            13 => {
                let s = self.subject();
                match self.rng.gen_range(0..4) {
                    0 => format!("{s} vörös bort ivott."),
                    1 => format!("{s} puha bőrt vásárolt."),
                    2 => format!("A bor {} volt.", self.pick(&["édes", "drága", "olcsó", "vörös"])),
                    _ => format!("A bőr {} volt.", self.pick(&["puha", "barna", "fekete", "drága"])),
                }
            }
            14 => {
                let s = self.subject();
                if self.chance(0.5) {
                    format!("Kár, hogy {s} nem jött el.")
                } else {
                    format!("{s} eltörte a karját.")
                }
            }
            15 => {
                let s = self.subject();
                if self.chance(0.5) {
                    format!("{} szél fújt{}.", self.pick(&["Erős", "Hideg", "Meleg"]), self.adverb())
                } else {
                    format!("{s} kenyeret szel.")
                }
            }
            16 => {
                let s = self.subject();
                if self.chance(0.5) {
                    format!("{s}{} ment haza.", self.adverb())
                } else {
                    format!("{s} háza {} volt.", self.pick(ADJECTIVES))
                }
            }
            17 => {
                let s = self.subject();
                if self.chance(0.5) {
                    format!("A pohár teli volt, {s} mégis kért még.")
                } else {
                    format!("{s} felvette a téli kabátját.")
                }
            }
            18 => {
                if self.chance(0.5) {
                    format!("Az asztal kerek volt{}.", self.adverb())
                } else {
                    let s = self.subject();
                    format!("{s} szerint a kerék lyukas volt.")
                }
            }
            _ => {
                let a = self.subject();
                let b = self.subject();
                let (_, past) = self.pick(INTRANSITIVE);
                format!("{a} és {} is {past}.", b.to_lowercase_first())
            }
        }
    }
}

trait LowerFirst {
    fn to_lowercase_first(&self) -> String;
}

impl LowerFirst for String {
    fn to_lowercase_first(&self) -> String {
        // Names stay capitalized; only the article is lowered.
        match self.strip_prefix("Az ").or_else(|| self.strip_prefix("A ")) {
            Some(rest) if self.starts_with("Az ") => format!("az {rest}"),
            Some(rest) => format!("a {rest}"),
            None => self.clone(),
        }
    }
}

/// `n` sentences from the stream seeded with `seed`.
pub fn synthetic_corpus(seed: u64, n: usize) -> Vec<String> {
    let mut g = SyntheticHungarian::new(seed);
    (0..n).map(|_| g.sentence()).collect()
}
