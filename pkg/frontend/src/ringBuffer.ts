// Fixed-capacity circular buffer; pushing past capacity drops the oldest
// entry, so memory stays bounded however long the stream runs.
export class RingBuffer<T> {
  private items: T[];
  private head = 0;
  private count = 0;

  constructor(readonly capacity: number) {
    if (capacity < 1) throw new Error("capacity must be >= 1");
    this.items = new Array(capacity);
  }

  push(item: T): void {
    this.items[this.head] = item;
    this.head = (this.head + 1) % this.capacity;
    if (this.count < this.capacity) this.count++;
  }

  get size(): number {
    return this.count;
  }

  // index 0 = oldest retained entry
  get(index: number): T | undefined {
    if (index < 0 || index >= this.count) return undefined;
    const at = (this.head - this.count + index + this.capacity) % this.capacity;
    return this.items[at];
  }

  last(): T | undefined {
    return this.count ? this.get(this.count - 1) : undefined;
  }

  *[Symbol.iterator](): Iterator<T> {
    for (let i = 0; i < this.count; i++) yield this.get(i)!;
  }

  toArray(): T[] {
    return [...this];
  }

  clear(): void {
    this.head = 0;
    this.count = 0;
  }
}
