// Spreadsheet view for the reviewer-paper matching task: the player's scaled
// scores in a grid, with cell clicks building a one-reviewer-per-paper
// proposal (clicking a second cell in the same column moves that paper's
// pick; a reviewer can hold only one paper, last click wins).

import { clear, el } from "../dom.js";
import type { MatchingView, Proposal } from "../types.js";

export class MatchingBoard {
  /** paper index -> reviewer index */
  readonly picks = new Map<number, number>();
  readonly root: HTMLElement;
  private cells: HTMLTableCellElement[][] = [];

  constructor(
    private view: MatchingView,
    private onChange: (board: MatchingBoard) => void = () => {},
  ) {
    this.root = el("div", { class: "matching-board" });
    this.render();
  }

  click(reviewer: number, paper: number): void {
    for (const [p, r] of this.picks) {
      if (r === reviewer && p !== paper) this.picks.delete(p);
    }
    this.picks.set(paper, reviewer);
    this.refresh();
    this.onChange(this);
  }

  complete(): boolean {
    return this.picks.size === this.view.k;
  }

  proposal(): Proposal {
    if (!this.complete()) throw new Error("assignment is incomplete");
    const rfp: number[] = [];
    for (let p = 0; p < this.view.k; p++) rfp.push(this.picks.get(p)!);
    return { kind: "matching", reviewer_for_paper: rfp };
  }

  private render(): void {
    clear(this.root);
    const shown = new Map<string, number>();
    for (const [i, j, v] of this.view.cells) shown.set(`${i},${j}`, v);
    const table = el("table", { class: "matching-table" });
    const head = el("tr", {}, [el("th", {}, [""])]);
    for (const paper of this.view.papers) {
      head.append(el("th", { title: paper }, [paper.split(":")[0]]));
    }
    table.append(head);
    this.cells = [];
    for (let i = 0; i < this.view.k; i++) {
      const row = el("tr", {}, [el("th", {}, [this.view.reviewers[i]])]);
      const rowCells: HTMLTableCellElement[] = [];
      for (let j = 0; j < this.view.k; j++) {
        const value = shown.get(`${i},${j}`);
        const cell = el("td", {
          class: "cell",
          "data-reviewer": String(i),
          "data-paper": String(j),
        }, [value === undefined ? "" : String(value)]);
        cell.addEventListener("click", () => this.click(i, j));
        rowCells.push(cell);
        row.append(cell);
      }
      this.cells.push(rowCells);
      table.append(row);
    }
    this.root.append(table);
    this.refresh();
  }

  private refresh(): void {
    for (let i = 0; i < this.view.k; i++) {
      for (let j = 0; j < this.view.k; j++) {
        this.cells[i][j].classList.toggle("picked", this.picks.get(j) === i);
      }
    }
  }
}
