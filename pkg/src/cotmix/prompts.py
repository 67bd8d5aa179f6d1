"""Fixed prompt templates used for generation, evaluation, and judging.

The templates are frozen byte-for-byte: training instructions, evaluation
prompts, and judge exchanges must not drift between runs, so they are kept
here as constants and rendered by plain segment substitution (``str.format``
would trip over the literal braces in the answer-format instruction).
"""

from __future__ import annotations

EVAL_PROMPT_TEMPLATE = (
    "Solve the following math problem and present the final answer in the format: "
    "Final Answer: $\\boxed{{your answer}}$\n"
    "\n"
    "Problem: {problem}\n"
    "\n"
    "Answer:"
)

SIMPLIFIED_TEACHER_PROMPT_TEMPLATE = (
    "Solve the following math problem. Your chain of thought responses will be used "
    "to teach a small model. Please generate responses in a simpler and more concise "
    "manner for better student comprehension. Present the final answer in the format: "
    "Final Answer: \\boxed{{your_answer}}.\n"
    "\n"
    "Problem: {problem}\n"
    "\n"
    "Answer:"
)

JUDGE_PROMPT_TEMPLATE = (
    "Given a math problem, its correct final answer, and the model's generated final "
    "answer, determine if the model's answer is correct. Respond with 'True' if the "
    "it is correct and 'False' if it is incorrect.\n"
    "\n"
    "Problem: {problem}\n"
    "\n"
    "Correct Final Answer: {ground truth}\n"
    "\n"
    "Model's Generated Final Answer: {resp answer}\n"
    "\n"
    "Your Judgement:"
)


def _segments(template: str, slots: tuple[str, ...]) -> tuple[str, ...]:
    parts = []
    rest = template
    for slot in slots:
        head, sep, rest = rest.partition("{" + slot + "}")
        if not sep:
            raise ValueError(f"template is missing slot {slot!r}")
        parts.append(head)
    parts.append(rest)
    return tuple(parts)


_EVAL_SEGS = _segments(EVAL_PROMPT_TEMPLATE, ("problem",))
_SIMPLIFIED_SEGS = _segments(SIMPLIFIED_TEACHER_PROMPT_TEMPLATE, ("problem",))
_JUDGE_SEGS = _segments(JUDGE_PROMPT_TEMPLATE, ("problem", "ground truth", "resp answer"))


def render_eval_prompt(problem: str) -> str:
    """Render the standard zero-shot evaluation prompt for a problem statement."""
    return _EVAL_SEGS[0] + problem + _EVAL_SEGS[1]


def render_simplified_teacher_prompt(problem: str) -> str:
    """Render the revised teacher prompt that asks for simpler reasoning."""
    return _SIMPLIFIED_SEGS[0] + problem + _SIMPLIFIED_SEGS[1]


def render_judge_prompt(problem: str, ground_truth: str, candidate: str) -> str:
    """Render the correctness-judgement prompt for one candidate answer."""
    return (
        _JUDGE_SEGS[0]
        + problem
        + _JUDGE_SEGS[1]
        + ground_truth
        + _JUDGE_SEGS[2]
        + candidate
        + _JUDGE_SEGS[3]
    )
