"""LLM-driven instance generation."""

from .prompts import ALL_CATEGORIES, Category, load_template, render_prompt
from .providers import (
    ChatSession, Exchange, HttpChatProvider, ProviderConfig, ReplayProvider, make_provider,
    provider_send, read_transcript, write_transcript,
)
from .runner import (
    COT, IL, GeneratedInstance, GenerationAborted, GenerationConfig, Status, check_and_repair,
    extract_soil, run_chain_of_thought, run_generation, run_instruction_learning, split_counts,
)

__all__ = [
    "ALL_CATEGORIES", "COT", "Category", "ChatSession", "Exchange", "GeneratedInstance",
    "GenerationAborted", "GenerationConfig", "HttpChatProvider", "IL", "ProviderConfig",
    "ReplayProvider", "Status", "check_and_repair", "extract_soil", "load_template",
    "make_provider", "provider_send", "read_transcript", "render_prompt", "run_chain_of_thought",
    "run_generation", "run_instruction_learning", "split_counts", "write_transcript",
]
