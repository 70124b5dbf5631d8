package toy;

public class D {
  void log(int n) {
    System.out.println(n);
    total = total - n;
  }
}
