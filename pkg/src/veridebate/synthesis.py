"""The synthesis step: turn a finished debate into a written report.

The report prompt walks the judge through a fixed five-point checklist
(specific verifiable details, reliable sourcing, tone and style,
emotional language, cross-channel confirmation) over the full
transcript. A lightweight keyword heuristic extracts a diagnostic
verdict lean from the report text; it never overrides the classifier.
"""

from __future__ import annotations

import json
import re

from .domain import DebateConfig, DebateLog, SummaryReport, VerdictHint, validate_log
from .engine import format_history, load_template, _settings
from .gateway import GenerationRequest

CHECKLIST_EN = (
    "Whether the news contains specific details and verifiable information.",
    "Whether the news cites reliable sources or news organizations.",
    "The tone and style of the news, with real news generally being more objective and neutral.",
    "Any use of emotional language, which might be a characteristic of fake news.",
    "Whether the information in the news can be confirmed through other reliable channels.",
)

CHECKLIST_CN = (
    "新闻是否包含具体细节和可核实的信息。",
    "新闻是否引用了可靠的来源或新闻机构。",
    "新闻的语气和文风，真实新闻通常更加客观中立。",
    "是否使用了情绪化语言，这可能是假新闻的特征。",
    "新闻中的信息能否通过其他可靠渠道得到证实。",
)

_TEMPLATE_BY_LANGUAGE = {"en": "synthesis_en", "cn": "synthesis_cn"}


def checklist_for(language: str) -> tuple[str, ...]:
    if language == "en":
        return CHECKLIST_EN
    if language == "cn":
        return CHECKLIST_CN
    raise ValueError(f"unsupported language {language!r}")


def build_synthesis_prompt(log: DebateLog, language: str = "en",
                           config: DebateConfig = DebateConfig()) -> GenerationRequest:
    checklist_for(language)
    template = load_template(_TEMPLATE_BY_LANGUAGE[language])
    system_text, user_text = template.render(
        history=format_history(log.turns, config.history_char_budget)
    )
    return GenerationRequest(
        messages=(("system", system_text), ("user", user_text)),
        settings=_settings(config),
    )


_REAL_PATTERNS = (
    r"\blikely (?:true|real|genuine|authentic)\b",
    r"\bappears (?:to be )?(?:true|real|genuine|authentic)\b",
    r"\bnews is (?:true|real|credible|authentic)\b",
    r"\bprobably (?:true|real)\b",
    r"\bleans real\b",
    r"\bwell[- ]sourced\b",
    r"属实",
    r"可信",
)

_FAKE_PATTERNS = (
    r"\blikely (?:fake|false|fabricated)\b",
    r"\bappears (?:to be )?(?:fake|false|fabricated)\b",
    r"\bnews is (?:fake|false|fabricated|misleading)\b",
    r"\bprobably (?:fake|false)\b",
    r"\bleans fake\b",
    r"\bmisinformation\b",
    r"\bhoax\b",
    r"虚假",
    r"捏造",
)


def parse_verdict_hint(report_text: str) -> VerdictHint:
    """Keyword heuristic over the report body; conflicting or absent
    signals both map to undecided."""
    if not report_text or not report_text.strip():
        raise ValueError("report text is empty")
    lowered = report_text.lower()
    real = any(re.search(p, lowered) for p in _REAL_PATTERNS)
    fake = any(re.search(p, lowered) for p in _FAKE_PATTERNS)
    if real and not fake:
        return VerdictHint.LEANS_REAL
    if fake and not real:
        return VerdictHint.LEANS_FAKE
    return VerdictHint.UNDECIDED


def synthesize(log: DebateLog, gateway, language: str = "en",
               config: DebateConfig = DebateConfig()) -> SummaryReport:
    """Produce the report for one debate. The log must be valid."""
    violations = validate_log(log)
    if violations:
        raise ValueError(f"cannot synthesize an invalid log: {violations}")
    request = build_synthesis_prompt(log, language, config)
    response = gateway.generate(request)
    return SummaryReport(
        news_id=log.news_id,
        text=response.text,
        verdict_hint=parse_verdict_hint(response.text),
    )


def report_to_dict(report: SummaryReport) -> dict:
    return {
        "news_id": report.news_id,
        "text": report.text,
        "verdict_hint": report.verdict_hint.value if report.verdict_hint else None,
    }


def report_from_dict(data: dict) -> SummaryReport:
    hint = data.get("verdict_hint")
    return SummaryReport(
        news_id=data["news_id"],
        text=data["text"],
        verdict_hint=VerdictHint(hint) if hint else None,
    )


def report_to_json(report: SummaryReport) -> str:
    return json.dumps(report_to_dict(report), ensure_ascii=False, sort_keys=True, indent=2)


def report_from_json(text: str) -> SummaryReport:
    return report_from_dict(json.loads(text))
