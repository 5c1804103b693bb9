"""Walk-through: question-driven extractive summarization.

A deterministic stub backend stands in for a QA model. Answers map to the
highest-scoring sentence containing them (document-level term frequency,
stopwords excluded), and the summary renders in question order with the
answers emphasized.
"""

from oats.corpus import build_document
from oats.qa import QuestionSpec, ask_all, stub_backend
from oats.summarizer import build_summary, default_stopwords, score_sentences


def main():
    doc = build_document(
        "demo-summary",
        "Outcomes in an imaging cohort",
        "Patients with hypertension made up 16.8% of the 573 abnormal-imaging cases. "
        "For this retrospective study, 645 patients underwent CT between January 17 and February 8. "
        "Counting all 645 patients, imaging identified 139 patients with one affected lobe. "
        "Ethics approval was obtained before enrollment.",
    )
    questions = [
        QuestionSpec("q1", "Are patients with hypertension?", 1),
        QuestionSpec("q2", "What is the date of the study?", 2),
        QuestionSpec("q3", "How many patients are in this study?", 3),
        QuestionSpec("q4", "Is there an odds ratio for severe patients?", 4),  # unanswerable
    ]
    backend = stub_backend(
        [
            ("hypertension", r"hypertension made up 16\.8%"),
            ("date", r"January 17 and February 8"),
            ("How many patients", r"645"),
        ]
    )

    answers = ask_all(backend, questions, doc.full_text)
    for answer in answers:
        state = f"{answer.text!r} at {answer.char_range}" if answer.answered else "(no answer)"
        print(f"{answer.question_id}: {state}")

    scores = score_sentences(doc, default_stopwords())
    print("\nsentence scores:", [(s.sentence_index, s.score) for s in scores])

    summary = build_summary(doc, questions, answers, scores)
    print(f"\nsummary has {len(summary.items)} items (q4 declined, duplicates collapsed):")
    print(summary.rendered)


if __name__ == "__main__":
    main()
