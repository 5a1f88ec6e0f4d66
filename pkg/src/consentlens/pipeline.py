"""Offline detection over a captured record: extract dialog, normalize text, run rules."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

from .clickables import classify_with_phrase, NodeShape
from .dialog import DialogCandidate, Extraction, ScoreWeights, extract_dialog
from .model import CrawlRecord, Stage
from .rules import Resources, RuleConfig, evaluate_all
from .text import LexiconSet, TranslationPort, detect_language, normalize, translate


@dataclass
class DetectOptions:
    config: RuleConfig = RuleConfig()
    resources: Optional[Resources] = None
    selector_list: Optional[Sequence[str]] = None
    keyword_map: Optional[LexiconSet] = None
    weights: ScoreWeights = ScoreWeights()
    translator: Optional[TranslationPort] = None


def extract_initial(record: CrawlRecord, opts: DetectOptions) -> Extraction:
    initial = record.stage(Stage.INITIAL)
    if initial is None:
        return Extraction(None, [])
    return extract_dialog(initial.forest(), initial.screenshot.viewport, opts.selector_list, opts.keyword_map, opts.weights)


def _translate_dialog(dialog: DialogCandidate, lang: str, opts: DetectOptions, warnings: List[str]) -> str:
    result = translate(dialog.extracted_text, lang, "en", opts.translator)
    if result.warning:
        warnings.append(result.warning)
    return result.text


def detect(record: CrawlRecord, opts: Optional[DetectOptions] = None) -> tuple:
    """Returns (DetectionReport, Extraction)."""
    opts = opts or DetectOptions()
    warnings: List[str] = []
    extraction = extract_initial(record, opts) if record.load_ok else Extraction(None, [])
    dialog = extraction.active
    text = None
    if dialog is not None and dialog.extracted_text.strip():
        lang = record.detected_language
        if lang is None:
            guess = detect_language(dialog.extracted_text)
            lang = guess.lang
            if not guess.reliable:
                warnings.append("language guess is low-confidence (short text)")
        if lang != "en":
            text = _translate_dialog(dialog, lang, opts, warnings)
            if opts.translator is not None:
                relabeled = []
                for c in dialog.clickables:
                    t = translate(c.label, lang, "en", opts.translator)
                    label = normalize(t.text)
                    cat, phrase = classify_with_phrase(label, NodeShape.of(c.node), opts.keyword_map)
                    relabeled.append(replace(c, label=label, category=cat, matched_phrase=phrase))
                dialog = replace(dialog, clickables=tuple(relabeled))
                extraction = Extraction(dialog, [dialog if d.path == dialog.path else d for d in extraction.all_visible])
    report = evaluate_all(
        record,
        dialog,
        extraction.all_visible,
        opts.config,
        opts.resources,
        text=text,
        warnings=warnings,
    )
    return report, extraction
