package toy;

public class A {
  int twice(int x) {
    int y = x * 2;
    return y + 1;
  }
}
