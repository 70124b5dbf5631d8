package stats;

public class Stats {
  private final double[] values;

  public Stats(double[] values) {
    this.values = values;
  }

  public double max() {
    double m = values[0];
    for (double v : values) if (v > m) m = v;
    return m;
  }

  public double min() {
    double m = values[0];
    for (double v : values) if (v < m) m = v;
    return m;
  }

  public double sum() {
    double s = 0;
    for (double v : values) s += v;
    return s;
  }

  public double mean() {
    return sum() / values.length;
  }

  public int size() {
    return values.length;
  }
}
