//! Ground-truth values of a synthetic application and how they are
//! written into forms and document sidecars.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::extract::{schema_for, ValueType, BUILDING_USES, ENERGY_CLASSES, EXPENSE_CATEGORIES, PROPERTY_KINDS, YES_NO};
use crate::ingest::{DeclaredType, DocumentSlot};
use crate::normalize::{complete_tax_id, format_money, format_number, fuzzy_score, normalize_name, DateValue, Money};
use crate::typology::TypologyId;

/// A true value, before any rendering into text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Fact {
    Text(String),
    Enum(String),
    Money(i64),
    Date(DateValue),
    Number(f64),
    /// Whole watts.
    Power(u64),
    TaxId(String),
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Text(s) | Fact::Enum(s) | Fact::TaxId(s) => f.write_str(s),
            Fact::Money(c) => f.write_str(&format_money(&Money::eur(*c))),
            Fact::Date(d) => write!(f, "{d}"),
            Fact::Number(n) => f.write_str(&format_number(*n)),
            Fact::Power(w) => write!(f, "{w} W"),
        }
    }
}

/// Where a value lives: a declared form field or a document tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Site {
    Form { form: String },
    Doc { doc: DocumentSlot, tag: String },
}

impl Site {
    pub fn form(field: &str) -> Self {
        Site::Form { form: field.to_string() }
    }

    pub fn doc(slot: DocumentSlot, tag: &str) -> Self {
        Site::Doc {
            doc: slot,
            tag: tag.to_string(),
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Form { form } => write!(f, "form.{form}"),
            Site::Doc { doc, tag } => write!(f, "{}.{tag}", doc.as_str()),
        }
    }
}

/// All true values of one application. A document tag holding `None`
/// is missing from the document itself.
#[derive(Debug, Clone, PartialEq)]
pub struct AppFacts {
    pub app_id: String,
    pub typology: TypologyId,
    pub form: BTreeMap<String, Fact>,
    pub docs: BTreeMap<DocumentSlot, BTreeMap<String, Option<Fact>>>,
}

impl AppFacts {
    pub fn get(&self, site: &Site) -> Option<&Fact> {
        match site {
            Site::Form { form } => self.form.get(form),
            Site::Doc { doc, tag } => self.docs.get(doc)?.get(tag)?.as_ref(),
        }
    }

    pub fn set(&mut self, site: &Site, fact: Option<Fact>) {
        match site {
            Site::Form { form } => {
                if let Some(f) = fact {
                    self.form.insert(form.clone(), f);
                }
            }
            Site::Doc { doc, tag } => {
                self.docs.entry(*doc).or_default().insert(tag.clone(), fact);
            }
        }
    }
}

const FIRST_NAMES: [&str; 16] = [
    "Ana", "João", "Maria", "Pedro", "Rita", "Tiago", "Inês", "Miguel", "Sofia", "Rui", "Carla", "Nuno", "Joana", "Luís",
    "Marta", "Hugo",
];
const SURNAMES: [&str; 16] = [
    "Silva", "Santos", "Ferreira", "Pereira", "Oliveira", "Costa", "Rodrigues", "Martins", "Jesus", "Sousa", "Fernandes",
    "Gonçalves", "Gomes", "Lopes", "Marques", "Alves",
];
const STREETS: [&str; 10] = [
    "Rua das Flores",
    "Avenida da Liberdade",
    "Rua do Carmo",
    "Travessa da Palma",
    "Rua de Santa Catarina",
    "Largo do Rato",
    "Rua Augusta",
    "Avenida da Boavista",
    "Estrada de Benfica",
    "Calçada do Combro",
];
const CITIES: [&str; 8] = ["Lisboa", "Porto", "Braga", "Coimbra", "Faro", "Aveiro", "Évora", "Viseu"];
const PROPERTY_TYPES: [&str; 3] = ["Moradia", "Apartamento", "Fração autónoma"];
const ENERGY_SOURCES: [&str; 4] = ["Solar fotovoltaica", "Eólica", "Hídrica", "Biomassa"];
const PANEL_BRANDS: [&str; 6] = ["Jinko Tiger", "Longi Hi-MO", "Trina Vertex", "Canadian HiKu", "REC Alpha", "SunPower Maxeon"];
const INVERTER_BRANDS: [&str; 4] = ["Huawei SUN2000", "Fronius Primo", "SMA Sunny Boy", "Growatt MIN"];
const BATTERY_BRANDS: [&str; 4] = ["LG RESU", "BYD HVS", "Huawei LUNA", "Tesla Powerwall"];
const HEAT_PUMPS: [&str; 4] = ["Daikin Altherma", "Mitsubishi Ecodan", "Vaillant aroTHERM", "Bosch Compress"];
const WATER_FITTINGS: [&str; 3] = ["Grohe Eurosmart", "Hansgrohe Focus", "Roca Atlas"];
const INSULATION: [&str; 4] = ["Poliestireno extrudido", "Lã de rocha", "Cortiça expandida", "Poliuretano projetado"];

pub fn equipment_type(major: u8) -> &'static str {
    match major {
        1 => "Janela eficiente",
        2 => "Isolamento térmico",
        3 => "Bomba de calor",
        4 => "Sistema fotovoltaico",
        _ => "Dispositivo de eficiência hídrica",
    }
}

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items.choose(rng).expect("non-empty pool")
}

fn person_name<R: Rng>(rng: &mut R) -> String {
    format!("{} {} {}", pick(rng, &FIRST_NAMES), pick(rng, &SURNAMES), pick(rng, &SURNAMES))
}

fn address<R: Rng>(rng: &mut R) -> String {
    format!(
        "{} {}, {:04}-{:03} {}",
        pick(rng, &STREETS),
        rng.gen_range(1..300),
        rng.gen_range(1000..9999),
        rng.gen_range(0..999),
        pick(rng, &CITIES)
    )
}

fn digits<R: Rng>(rng: &mut R, n: usize) -> String {
    (0..n).map(|_| char::from(b'0' + rng.gen_range(0..10u8))).collect()
}

/// A valid tax id whose first digit is `lead` (1-3 persons, 5 companies).
pub fn tax_id<R: Rng>(rng: &mut R, lead: u8) -> String {
    let mut prefix = [0u8; 8];
    prefix[0] = lead;
    for d in &mut prefix[1..] {
        *d = rng.gen_range(0..10);
    }
    complete_tax_id(&prefix).digits
}

fn date_from(base: DateValue, days: i64) -> DateValue {
    base.add_days(days).expect("dates stay in range")
}

pub fn programme_start() -> DateValue {
    DateValue::from_ymd(2022, 5, 1).expect("valid")
}

/// Draws a consistent application: every document agrees with the form.
pub fn generate_facts<R: Rng>(rng: &mut R, app_id: &str, typology: &TypologyId) -> AppFacts {
    use Fact::*;
    let major = typology.major();
    let mut form = BTreeMap::new();
    let start = programme_start();
    let submission = date_from(start, rng.gen_range(120..700));
    let invoice_date = date_from(start, rng.gen_range(0..submission.days_since(&start) - 40));
    let receipt_date = date_from(invoice_date, rng.gen_range(0..30));
    let name = person_name(rng);
    let lead = rng.gen_range(1..=3);
    let applicant = tax_id(rng, lead);
    let company = tax_id(rng, 5);
    let addr = address(rng);
    let value = rng.gen_range(80_000..1_500_000i64);
    let area = f64::from(rng.gen_range(100..800u32)) / 2.0;
    let property_type = pick(rng, &PROPERTY_TYPES).to_string();
    let article = format!("U-{}", digits(rng, 4));
    let year = submission.year() - i32::from(rng.gen_range(0..2u8));
    let invoice_number = format!("FT {year}/{}", rng.gen_range(1..9999));
    let eq_type = equipment_type(major).to_string();

    form.insert("applicant_name".into(), Text(name.clone()));
    form.insert("applicant_tax_id".into(), TaxId(applicant.clone()));
    form.insert("property_address".into(), Text(addr.clone()));
    form.insert("property_type".into(), Text(property_type.clone()));
    form.insert("property_article".into(), Text(article.clone()));
    form.insert("gross_area".into(), Number(area));
    form.insert("invoice_number".into(), Text(invoice_number.clone()));
    form.insert("invoice_value".into(), Money(value));
    form.insert("company_tax_id".into(), TaxId(company.clone()));
    form.insert("equipment_type".into(), Text(eq_type.clone()));
    form.insert("submission_date".into(), Date(submission));

    let mut docs: BTreeMap<DocumentSlot, BTreeMap<String, Option<Fact>>> = BTreeMap::new();
    let put = |docs: &mut BTreeMap<DocumentSlot, BTreeMap<String, Option<Fact>>>, slot, tag: &str, f: Fact| {
        docs.entry(slot).or_default().insert(tag.to_string(), Some(f));
    };
    use DocumentSlot as S;

    put(&mut docs, S::Invoice, "invoice_number", Text(invoice_number));
    put(&mut docs, S::Invoice, "invoice_date", Date(invoice_date));
    put(&mut docs, S::Invoice, "total_value", Money(value));
    put(&mut docs, S::Invoice, "buyer_name", Text(name.clone()));
    put(&mut docs, S::Invoice, "buyer_tax_id", TaxId(applicant.clone()));
    put(&mut docs, S::Invoice, "seller_tax_id", TaxId(company));
    put(&mut docs, S::Invoice, "line_items_text", Text(format!("Fornecimento e instalação: {eq_type}")));
    put(&mut docs, S::Invoice, "install_address", Text(addr.clone()));
    put(
        &mut docs,
        S::Invoice,
        "expense_category",
        Enum(EXPENSE_CATEGORIES[usize::from(major) - 1].to_string()),
    );

    put(&mut docs, S::Receipt, "receipt_number", Text(format!("RC {year}/{}", rng.gen_range(1..9999))));
    put(&mut docs, S::Receipt, "receipt_date", Date(receipt_date));
    put(&mut docs, S::Receipt, "amount", Money(value));
    put(&mut docs, S::Receipt, "payer_tax_id", TaxId(applicant.clone()));

    put(&mut docs, S::PropertyRegistry, "owner_name", Text(name.clone()));
    put(&mut docs, S::PropertyRegistry, "owner_tax_id", TaxId(applicant.clone()));
    put(&mut docs, S::PropertyRegistry, "address", Text(addr.clone()));
    put(&mut docs, S::PropertyRegistry, "property_type", Text(property_type));
    put(&mut docs, S::PropertyRegistry, "property_kind", Enum("urbano".into()));
    put(&mut docs, S::PropertyRegistry, "property_article", Text(article));
    put(&mut docs, S::PropertyRegistry, "gross_area", Number(area));
    put(&mut docs, S::PropertyRegistry, "building_use", Enum("habitacao".into()));
    put(&mut docs, S::PropertyRegistry, "multiple_owners", Enum("no".into()));
    put(&mut docs, S::PropertyRegistry, "license_year", Number(f64::from(rng.gen_range(1950..2016u32))));
    put(
        &mut docs,
        S::PropertyRegistry,
        "certificate_date",
        Date(date_from(submission, -rng.gen_range(1..150))),
    );

    put(&mut docs, S::EnergyCertificate, "certificate_number", Text(format!("SCE{}", digits(rng, 9))));
    put(&mut docs, S::EnergyCertificate, "energy_class", Enum(pick(rng, &ENERGY_CLASSES[..5]).to_string()));
    put(
        &mut docs,
        S::EnergyCertificate,
        "issue_date",
        Date(date_from(submission, -rng.gen_range(10..900))),
    );

    put(&mut docs, S::EquipmentDatasheet, "equipment_type", Text(eq_type));
    match major {
        1 => {
            let w = f64::from(rng.gen_range(6..60u32)) / 2.0;
            form.insert("window_area".into(), Number(w));
            put(&mut docs, S::Invoice, "window_area", Number(w));
            put(&mut docs, S::EquipmentDatasheet, "ce_mark", Enum("yes".into()));
            put(&mut docs, S::EquipmentDatasheet, "energy_class", Enum("A+".into()));
            put(&mut docs, S::EquipmentDatasheet, "classe_id", Text(format!("CLASSE+ {}", digits(rng, 6))));
        }
        2 => {
            let a = f64::from(rng.gen_range(20..200u32));
            let material = pick(rng, &INSULATION).to_string();
            form.insert("insulated_area".into(), Number(a));
            put(&mut docs, S::Invoice, "insulated_area", Number(a));
            put(&mut docs, S::Invoice, "insulation_material", Text(material.clone()));
            put(&mut docs, S::EquipmentDatasheet, "ce_mark", Enum("yes".into()));
            put(&mut docs, S::EquipmentDatasheet, "insulation_material", Text(material));
        }
        3 | 5 => {
            let pool: &[&str] = if major == 3 { &HEAT_PUMPS } else { &WATER_FITTINGS };
            let model = format!("{} {}", pick(rng, pool), rng.gen_range(100..999));
            put(&mut docs, S::Invoice, "equipment_model", Text(model.clone()));
            put(&mut docs, S::EquipmentDatasheet, "ce_mark", Enum("yes".into()));
            put(&mut docs, S::EquipmentDatasheet, "equipment_model", Text(model));
            put(&mut docs, S::EquipmentDatasheet, "energy_class", Enum("A+".into()));
        }
        4 => {
            let peak = u64::from(rng.gen_range(150..600u32)) * 10;
            let inverter = peak - u64::from(rng.gen_range(0..20u32)) * 10;
            let battery = peak * u64::from(rng.gen_range(130..240u32)) / 100 / 10 * 10;
            let panels = rng.gen_range(4..24u32);
            let batteries = rng.gen_range(1..3u32);
            let panel = format!("{} {}W", pick(rng, &PANEL_BRANDS), rng.gen_range(38..46) * 10);
            let inv_model = format!("{} {}KTL", pick(rng, &INVERTER_BRANDS), inverter / 1000);
            let bat_model = format!("{} {}", pick(rng, &BATTERY_BRANDS), rng.gen_range(5..16));
            let source = ENERGY_SOURCES[0].to_string();
            form.insert("energy_source".into(), Text(source.clone()));
            form.insert("peak_power".into(), Number(peak as f64));
            form.insert("inverter_power".into(), Number(inverter as f64));
            form.insert("battery_power".into(), Number(battery as f64));
            form.insert("panel_count".into(), Number(f64::from(panels)));
            form.insert("battery_count".into(), Number(f64::from(batteries)));
            for (tag, f) in [
                ("panel_model", Text(panel.clone())),
                ("inverter_model", Text(inv_model.clone())),
                ("battery_model", Text(bat_model.clone())),
                ("panel_count", Number(f64::from(panels))),
                ("battery_count", Number(f64::from(batteries))),
                ("battery_power", Power(battery)),
            ] {
                put(&mut docs, S::Invoice, tag, f);
            }
            for (tag, f) in [
                ("panel_model", Text(panel)),
                ("inverter_model", Text(inv_model)),
                ("battery_model", Text(bat_model)),
                ("battery_power", Power(battery)),
                ("panel_ce_mark", Enum("yes".into())),
                ("inverter_ce_mark", Enum("yes".into())),
                ("battery_ce_mark", Enum("yes".into())),
            ] {
                put(&mut docs, S::EquipmentDatasheet, tag, f);
            }
            let mcp = S::PriorCommunication;
            put(&mut docs, mcp, "mcp_type", Enum(rng.gen_range(1..=5u8).to_string()));
            put(&mut docs, mcp, "ID_energy_producer", Text(format!("MCP-{year}-{}", digits(rng, 6))));
            put(&mut docs, mcp, "NIF_NIPC_mcp", TaxId(applicant));
            put(&mut docs, mcp, "address_mcp", Text(addr));
            put(&mut docs, mcp, "energy_source_mcp", Text(source));
            put(&mut docs, mcp, "generator_power_mcp", Power(peak));
            put(&mut docs, mcp, "nominal_power_mcp", Power(inverter));
            put(&mut docs, mcp, "date_start_mcp", Date(date_from(invoice_date, rng.gen_range(0..30))));
            put(&mut docs, mcp, "date_submission_mcp", Date(date_from(submission, -rng.gen_range(1..30))));
        }
        _ => {}
    }
    AppFacts {
        app_id: app_id.to_string(),
        typology: typology.clone(),
        form,
        docs,
    }
}

/// Declared type and text for a form field.
pub fn render_form(fact: &Fact) -> (DeclaredType, String) {
    match fact {
        Fact::Text(s) | Fact::Enum(s) => (DeclaredType::Text, s.clone()),
        Fact::TaxId(s) => (DeclaredType::TaxId, s.clone()),
        Fact::Money(c) => (DeclaredType::Money, format_money(&Money::eur(*c))),
        Fact::Date(d) => (
            DeclaredType::Date,
            format!("{:02}/{:02}/{:04}", d.day(), d.month(), d.year()),
        ),
        Fact::Number(n) => (DeclaredType::Number, format_number(*n)),
        Fact::Power(w) => (DeclaredType::Number, w.to_string()),
    }
}

fn kilowatts(watts: u64) -> String {
    let whole = watts / 1000;
    let frac = watts % 1000;
    if frac == 0 {
        format!("{whole} kW")
    } else {
        let f = format!("{frac:03}");
        format!("{whole},{} kW", f.trim_end_matches('0'))
    }
}

/// Text a document would carry for `fact`, in one of several notations
/// the normalizers accept.
pub fn render_doc<R: Rng>(rng: &mut R, fact: &Fact) -> String {
    match fact {
        Fact::Text(s) => {
            if rng.gen_bool(0.3) {
                s.to_uppercase()
            } else {
                s.clone()
            }
        }
        Fact::Enum(s) => s.clone(),
        Fact::TaxId(s) => match rng.gen_range(0..3) {
            0 => s.clone(),
            1 => format!("PT{s}"),
            _ => format!("{} {} {}", &s[..3], &s[3..6], &s[6..]),
        },
        Fact::Money(c) => {
            let (units, cents) = (c / 100, c % 100);
            match rng.gen_range(0..3) {
                0 => format_money(&Money::eur(*c)),
                1 => format!("{units}.{cents:02} EUR"),
                _ => format!("{units},{cents:02}"),
            }
        }
        Fact::Date(d) => match rng.gen_range(0..3) {
            0 => format!("{:02}/{:02}/{:04}", d.day(), d.month(), d.year()),
            1 => d.to_string(),
            _ => format!("{:02}-{:02}-{:04}", d.day(), d.month(), d.year()),
        },
        Fact::Number(n) => {
            let s = format_number(*n);
            if rng.gen_bool(0.5) {
                s.replace('.', ",")
            } else {
                s
            }
        }
        Fact::Power(w) => {
            if rng.gen_bool(0.5) {
                format!("{w} W")
            } else {
                kilowatts(*w)
            }
        }
    }
}

fn far_apart(a: &str, b: &str) -> bool {
    fuzzy_score(&normalize_name(a), &normalize_name(b)) < 0.6
}

/// A text unmistakably different from `original`, drawn like the
/// original was where a pool exists.
fn decoy_text<R: Rng>(rng: &mut R, tag: &str, original: &str) -> String {
    for _ in 0..64 {
        let candidate = match tag {
            "applicant_name" | "buyer_name" | "owner_name" => person_name(rng),
            "property_address" | "address" | "install_address" | "address_mcp" => address(rng),
            "property_type" => pick(rng, &PROPERTY_TYPES).to_string(),
            "energy_source" | "energy_source_mcp" => pick(rng, &ENERGY_SOURCES).to_string(),
            "equipment_type" => equipment_type(rng.gen_range(1..=5)).to_string(),
            "insulation_material" => pick(rng, &INSULATION).to_string(),
            "panel_model" => format!("{} {}W", pick(rng, &PANEL_BRANDS), rng.gen_range(38..46) * 10),
            "inverter_model" => format!("{} {}KTL", pick(rng, &INVERTER_BRANDS), rng.gen_range(1..10)),
            "battery_model" => format!("{} {}", pick(rng, &BATTERY_BRANDS), rng.gen_range(5..16)),
            "equipment_model" => format!("{} {}", pick(rng, &HEAT_PUMPS), rng.gen_range(100..999)),
            _ => {
                let len = original.chars().count().clamp(4, 16);
                (0..len).map(|_| char::from(b'A' + rng.gen_range(0..26u8))).collect()
            }
        };
        if far_apart(&candidate, original) {
            return candidate;
        }
    }
    "ZQXWVKJ".to_string()
}

/// The variants schemas allow for an enum tag of `slot`.
fn enum_variants(slot: DocumentSlot, tag: &str, typology: &TypologyId) -> Vec<String> {
    match schema_for(slot, typology).tag(tag).map(|t| &t.value_type) {
        Some(ValueType::Enum(v)) => v.clone(),
        _ => match tag {
            "building_use" => BUILDING_USES.iter().map(|s| s.to_string()).collect(),
            "property_kind" => PROPERTY_KINDS.iter().map(|s| s.to_string()).collect(),
            _ => YES_NO.iter().map(|s| s.to_string()).collect(),
        },
    }
}

/// Wrong values to try at `site`; each differs from the truth.
pub fn mutations<R: Rng>(rng: &mut R, site: &Site, fact: &Fact, typology: &TypologyId, company: &str) -> Vec<Fact> {
    let tag = match site {
        Site::Form { form } => form.as_str(),
        Site::Doc { tag, .. } => tag.as_str(),
    };
    match fact {
        Fact::Text(s) => vec![Fact::Text(decoy_text(rng, tag, s))],
        Fact::Enum(v) => {
            let slot = match site {
                Site::Doc { doc, .. } => *doc,
                Site::Form { .. } => DocumentSlot::Other,
            };
            let mut others: Vec<String> = enum_variants(slot, tag, typology)
                .into_iter()
                .filter(|o| !o.eq_ignore_ascii_case(v))
                .collect();
            others.shuffle(rng);
            others.into_iter().take(2).map(Fact::Enum).collect()
        }
        Fact::TaxId(t) => {
            let mut out = vec![Fact::TaxId(loop {
                let lead = rng.gen_range(1..=3);
                let c = tax_id(rng, lead);
                if c != *t {
                    break c;
                }
            })];
            if tag == "owner_tax_id" && company != t {
                out.push(Fact::TaxId(company.to_string()));
            }
            out
        }
        Fact::Money(c) => {
            let delta = rng.gen_range(100..50_000i64);
            let mut out = vec![Fact::Money(c + delta)];
            if c - delta > 0 {
                out.push(Fact::Money(c - delta));
            }
            out
        }
        Fact::Date(d) => [-rng.gen_range(1..60), rng.gen_range(1..60), -rng.gen_range(200..500), rng.gen_range(200..500)]
            .into_iter()
            .map(|days| Fact::Date(date_from(*d, days)))
            .collect(),
        Fact::Number(n) => {
            let step = if n.fract() == 0.0 { 1.0 } else { 0.5 };
            let bump = step * f64::from(rng.gen_range(1..20u32));
            let mut out = vec![Fact::Number(n + bump)];
            if *n - bump > 0.0 {
                out.push(Fact::Number(n - bump));
            }
            if *n > 1000.0 {
                // Power declared in watts: a large relative change as well.
                out.push(Fact::Number((n * 0.5).round()));
            }
            out
        }
        Fact::Power(w) => {
            let bump = u64::from(rng.gen_range(1..300u32)) * 10;
            let mut out = vec![Fact::Power(w + bump), Fact::Power(w / 2 / 10 * 10)];
            if *w > bump {
                out.push(Fact::Power(w - bump));
            }
            out.retain(|f| f != &Fact::Power(*w) && f != &Fact::Power(0));
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{parse_tag_value, ExtractedValue, TagSpec};
    use crate::ingest::parse_declared;
    use crate::value::TypedValue;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn as_typed(f: &Fact) -> ValueType {
        match f {
            Fact::Text(_) => ValueType::Text,
            Fact::Enum(v) => ValueType::Enum(vec![v.clone()]),
            Fact::Money(_) => ValueType::Money,
            Fact::Date(_) => ValueType::Date,
            Fact::Number(_) => ValueType::Number,
            Fact::Power(_) => ValueType::Power,
            Fact::TaxId(_) => ValueType::TaxId,
        }
    }

    #[test]
    fn rendered_document_values_parse_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for ty in TypologyId::all() {
            for i in 0..40 {
                let facts = generate_facts(&mut rng, &format!("a{i}"), &ty);
                for tags in facts.docs.values() {
                    for (tag, fact) in tags {
                        let fact = fact.as_ref().unwrap();
                        let tag_def = TagSpec {
                            name: tag.clone(),
                            value_type: as_typed(fact),
                            required: true,
                        };
                        let text = render_doc(&mut rng, fact);
                        match (parse_tag_value(&tag_def, Some(&text)), fact) {
                            (ExtractedValue::Present { value, warnings, .. }, _) => {
                                assert!(warnings.is_empty(), "{tag}: {text}");
                                let ok = match (&value, fact) {
                                    (TypedValue::Money(m), Fact::Money(c)) => m.amount_cents == *c,
                                    (TypedValue::Date(d), Fact::Date(e)) => d == e,
                                    (TypedValue::Number(n), Fact::Number(m)) => n == m,
                                    (TypedValue::Power(p), Fact::Power(w)) => p.watts == *w,
                                    (TypedValue::TaxId(t), Fact::TaxId(s)) => t.valid && t.digits == *s,
                                    (TypedValue::Text(t), Fact::Text(s)) => {
                                        normalize_name(t).canonical == normalize_name(s).canonical
                                    }
                                    (TypedValue::Enum(t), Fact::Enum(s)) => t.eq_ignore_ascii_case(s),
                                    _ => false,
                                };
                                assert!(ok, "{tag}: {text} -> {value:?}");
                            }
                            (other, _) => panic!("{tag}: {text} -> {other:?}"),
                        }
                    }
                }
                for fact in facts.form.values() {
                    let (kind, raw) = render_form(fact);
                    assert!(parse_declared(kind, &raw).warning.is_none(), "{raw}");
                }
            }
        }
    }

    #[test]
    fn text_decoys_are_far_from_the_original() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for tag in ["applicant_name", "address", "property_article", "panel_model", "invoice_number"] {
            for _ in 0..200 {
                let orig = match tag {
                    "applicant_name" => person_name(&mut rng),
                    "address" => address(&mut rng),
                    _ => format!("U-{}", digits(&mut rng, 4)),
                };
                let d = decoy_text(&mut rng, tag, &orig);
                assert!(far_apart(&d, &orig), "{orig} vs {d}");
            }
        }
    }

    #[test]
    fn mutations_always_differ() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ty: TypologyId = "4".parse().unwrap();
        let facts = generate_facts(&mut rng, "x", &ty);
        for (slot, tags) in &facts.docs {
            for (tag, f) in tags {
                let f = f.as_ref().unwrap();
                let site = Site::doc(*slot, tag);
                for m in mutations(&mut rng, &site, f, &ty, "500000000") {
                    assert_ne!(&m, f, "{site}");
                }
            }
        }
    }
}
